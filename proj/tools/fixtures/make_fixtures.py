#!/usr/bin/env python3
"""Regenerates the synthetic fixtures under fixtures/.

Usage: python3 tools/fixtures/make_fixtures.py [--seed 20240917] [--out fixtures]

The output is committed; tests never run this script. Rerunning with the
recorded seed reproduces the committed files byte for byte.
"""

import argparse
import csv
import io
import json
import random
from pathlib import Path

SEED = 20240917
BLOBS_SEED = 7

NOUNS = ["dog", "cat", "river", "forest", "castle", "dragon", "friend", "monster", "storm", "garden",
         "music", "treasure", "gift", "cheese", "light", "hope", "fear", "joy", "lantern", "mountain"]
VERBS = ["love", "hate", "find", "help", "hurt", "win", "lose", "watch", "follow", "build"]
ADJS = ["happy", "sad", "brave", "afraid", "dark", "old", "quiet", "bright", "strange", "small"]
ADVS = ["slowly", "quickly", "finally", "suddenly", "gently"]
PROMPTS = [("stamp", "letter", "send"), ("petrol", "diesel", "pump"), ("belief", "faith", "sing"),
           ("gloom", "payment", "exist"), ("organ", "empire", "comply")]


def past(verb):
    irregular = {"find": "found", "win": "won", "lose": "lost", "hurt": "hurt", "build": "built"}
    if verb in irregular:
        return irregular[verb]
    return verb + ("d" if verb.endswith("e") else "ed")


def tok(i, form, lemma, upos, head, deprel):
    return [str(i), form, lemma, upos, "_", "_", str(head), deprel, "_", "_"]


def sentence(rng):
    kind = rng.randrange(4)
    n1, n2 = rng.sample(NOUNS, 2)
    v, a, adv = rng.choice(VERBS), rng.choice(ADJS), rng.choice(ADVS)
    if kind == 0:  # The ADJ N1 VERBed the N2 .
        rows = [tok(1, "The", "the", "DET", 3, "det"), tok(2, a, a, "ADJ", 3, "amod"),
                tok(3, n1, n1, "NOUN", 4, "nsubj"), tok(4, past(v), v, "VERB", 0, "root"),
                tok(5, "the", "the", "DET", 6, "det"), tok(6, n2, n2, "NOUN", 4, "obj"),
                tok(7, ".", ".", "PUNCT", 4, "punct")]
    elif kind == 1:  # The N1 did not VERB the N2 .
        rows = [tok(1, "The", "the", "DET", 2, "det"), tok(2, n1, n1, "NOUN", 5, "nsubj"),
                tok(3, "did", "do", "AUX", 5, "aux"), tok(4, "not", "not", "PART", 5, "advmod"),
                tok(5, v, v, "VERB", 0, "root"), tok(6, "the", "the", "DET", 7, "det"),
                tok(7, n2, n2, "NOUN", 5, "obj"), tok(8, ".", ".", "PUNCT", 5, "punct")]
    elif kind == 2:  # She ADV VERBed the ADJ N1 near the N2 .
        rows = [tok(1, "She", "she", "PRON", 3, "nsubj"), tok(2, adv, adv, "ADV", 3, "advmod"),
                tok(3, past(v), v, "VERB", 0, "root"), tok(4, "the", "the", "DET", 6, "det"),
                tok(5, a, a, "ADJ", 6, "amod"), tok(6, n1, n1, "NOUN", 3, "obj"),
                tok(7, "near", "near", "ADP", 9, "case"), tok(8, "the", "the", "DET", 9, "det"),
                tok(9, n2, n2, "NOUN", 3, "obl"), tok(10, ".", ".", "PUNCT", 3, "punct")]
    else:  # The N1 was ADJ .
        rows = [tok(1, "The", "the", "DET", 2, "det"), tok(2, n1, n1, "NOUN", 4, "nsubj"),
                tok(3, "was", "be", "AUX", 4, "cop"), tok(4, a, a, "ADJ", 0, "root"),
                tok(5, ".", ".", "PUNCT", 4, "punct")]
    return rows


def render_conllu(sentences):
    out = io.StringIO()
    for k, rows in enumerate(sentences, 1):
        text = " ".join(r[1] for r in rows[:-1]) + "."
        out.write(f"# sent_id = {k}\n# text = {text}\n")
        for r in rows:
            out.write("\t".join(r) + "\n")
        out.write("\n")
    return out.getvalue()


def story_text(sentences):
    return " ".join(" ".join(r[1] for r in rows[:-1]) + "." for rows in sentences)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def make_corpus(out, rng):
    conllu_dir = out / "corpus" / "conllu"
    conllu_dir.mkdir(parents=True, exist_ok=True)
    rows, tally = [], {}
    for author, prefix, lo, hi in (("human", "h", 3, 5), ("llm", "l", 6, 9)):
        raters = ["rater1", "rater2", "rater3", "rater4"]
        for i in range(1, 21):
            sid = f"{prefix}{i:02d}"
            sents = [sentence(rng) for _ in range(rng.randint(lo, hi))]
            (conllu_dir / f"{sid}.conllu").write_text(render_conllu(sents), encoding="utf-8")
            base = 1 + (i - 1) % 5
            scores = [min(5, max(1, base + rng.choice((-1, 0, 0, 1)))) for _ in raters]
            for r, s in zip(raters, scores):
                tally.setdefault(r, [0] * 5)[s - 1] += 1
            prompt = PROMPTS[(i - 1) % len(PROMPTS)]
            rows.append([sid, author, *prompt, story_text(sents), *scores])
    write_csv(out / "corpus" / "stories.csv",
              ["story_id", "author", "prompt1", "prompt2", "prompt3", "text", "rater1", "rater2", "rater3", "rater4"],
              rows)
    write_csv(out / "corpus" / "rating_tally.csv", ["rater_id", "score", "count"],
              [[r, k + 1, c[k]] for r, c in tally.items() for k in range(5)])


def make_blobs(out):
    """Three Gaussian blobs in two informative features plus two noise columns."""
    rng = random.Random(BLOBS_SEED)
    centers = [(-4.0, 0.0), (4.0, 0.0), (0.0, 5.0)]
    rows = []
    for i in range(300):
        label = i % 3
        informative = [f"{c + rng.gauss(0, 0.8):.6f}" for c in centers[label]]
        noise = [f"{rng.uniform(-1, 1):.6f}" for _ in range(2)]
        rows.append([*informative, *noise, label])
    header = ["f1", "f2", "noise1", "noise2", "label"]
    (out / "ml").mkdir(parents=True, exist_ok=True)
    write_csv(out / "ml" / "blobs.csv", header, rows)
    labels = [r[-1] for r in rows]
    rng.shuffle(labels)
    write_csv(out / "ml" / "blobs_shuffled.csv", header, [r[:-1] + [y] for r, y in zip(rows, labels)])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=SEED)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[2] / "fixtures")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    make_corpus(args.out, random.Random(args.seed))
    make_blobs(args.out)
    (args.out / "GENERATED.json").write_text(
        json.dumps({"generator": "tools/fixtures/make_fixtures.py", "seed": args.seed, "blobs_seed": BLOBS_SEED},
                   indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
