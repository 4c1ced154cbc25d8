"""Convert the English lexical resources bundled with the EmoAtlas wheel
(BSD-3-Clause, notice in data/NOTICE) into the flat TSV files under
data/. Run with the path of an extracted `emoatlas` package directory."""
import ast
import json
import sys
from pathlib import Path

EMOTIONS = ["anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"]
HEADER = "# Derived from EmoAtlas 0.1.6 English resources (BSD-3-Clause); see data/NOTICE.\n"


def literal(path, name):
    tree = ast.parse(Path(path).read_text())
    for node in tree.body:
        if isinstance(node, ast.Assign) and node.targets[0].id == name:
            value = node.value
            if isinstance(value, ast.Call):  # set([...])
                value = value.args[0]
            return ast.literal_eval(value)
    raise KeyError(name)


def main(pkg):
    pkg = Path(pkg)
    out = Path(__file__).resolve().parents[2] / "data"
    emo = json.loads((pkg / "langs" / "english.json").read_text())
    positive = set(literal(pkg / "valence" / "english.py", "_positive"))
    negative = set(literal(pkg / "valence" / "english.py", "_negative"))
    antonyms = literal(pkg / "antonyms" / "english.py", "_antonyms")

    with open(out / "emolex_en.tsv", "w") as f:
        f.write(HEADER)
        f.write("# Emotion associations from the NRC Emotion Lexicon as packaged by EmoAtlas;\n")
        f.write("# valence flags from the EmoAtlas valence lists. Only flag=1 rows are listed.\n")
        for word in sorted(set(emo) | positive | negative):
            w = word.lower()
            if not w or any(c in w for c in "\t\n"):
                continue
            for e in EMOTIONS:
                if e in emo.get(word, []):
                    f.write(f"{w}\t{e}\t1\n")
            if word in positive:
                f.write(f"{w}\tpositive\t1\n")
            if word in negative:
                f.write(f"{w}\tnegative\t1\n")

    with open(out / "antonyms_en.tsv", "w") as f:
        f.write(HEADER)
        f.write("# Antonym pairs originating from WordNet as packaged by EmoAtlas.\n")
        for k in sorted(antonyms):
            v = antonyms[k]
            if k and v and "\t" not in k + v:
                f.write(f"{k.lower()}\t{v.lower()}\n")


if __name__ == "__main__":
    main(sys.argv[1])
