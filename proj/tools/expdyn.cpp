#include "expdyn/cli.hpp"

int main(int argc, char** argv) {
  return expdyn::cli::run_command(argc, argv);
}
