#include "kwitness/cli.hpp"

int main(int argc, char** argv) {
  return kwitness::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
