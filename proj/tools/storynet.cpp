#include "storynet/cli.hpp"

int main(int argc, char** argv) { return storynet::run_cli(argc, argv); }
