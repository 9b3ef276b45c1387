#include <iostream>
#include <string>
#include <vector>

#include "qbin/cli.hpp"
#include "qbin/errors.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  try {
    const qbin::cli::RunConfig config = qbin::cli::parse_and_validate(args);
    return qbin::cli::run(config, std::cout);
  } catch (const qbin::UsageError& e) {
    std::cerr << "qbin: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qbin: error: " << e.what() << '\n';
    return 1;
  }
}
