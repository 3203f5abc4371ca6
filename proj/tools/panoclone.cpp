#include "panoclone/cli.hpp"

int main(int argc, char** argv) { return panoclone::run_cli(argc, argv); }
