#include "pbp/app/cli.hpp"

int main(int argc, char** argv) { return pbp::app::run_cli(argc, argv); }
