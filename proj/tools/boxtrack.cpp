#include "boxtrack/cli.hpp"

int main(int argc, char** argv) { return boxtrack::run(argc, argv); }
