#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <set>

#include "acceptance/criteria.hpp"

int main(int argc, char** argv) {
  acceptance::Options opt;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--full") == 0) {
      opt.full = true;
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--only N]... [--full]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  for (const auto& c : acceptance::criteria()) {
    if (!only.empty() && !only.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    acceptance::Outcome o;
    try {
      o = c.run(opt);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %d %s (%.1fs) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
