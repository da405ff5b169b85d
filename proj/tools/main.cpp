#include "photofeedback/scenarios.hpp"

int main(int argc, char** argv) { return photofeedback::cli_main(argc, argv); }
