#include "pinch/harness.hpp"

int main(int argc, char** argv) { return pinch::run_cli(argc, argv); }
