#include <algorithm>
#include <iostream>
#include <string>
#include <thread>

#include "mexlab/harness/acceptance.hpp"

// One line per criterion; the exit status is non-zero when any fails.
int main(int argc, char** argv) {
  mexlab::AcceptanceOptions opt;
  opt.threads = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u));
  if (argc > 1) opt.out_dir = argv[1];
  int failed = 0;
  mexlab::run_acceptance(opt, [&](const mexlab::CriterionResult& r) {
    failed += !r.pass;
    std::cout << mexlab::format_result(r) << std::endl;
  });
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
