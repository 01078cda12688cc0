// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <set>

#include "criteria.hpp"

using namespace djfam::acceptance;

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "DSP oracle equivalence", dsp_oracle_equivalence},
      {2, "analytic signal checks", analytic_signal_checks},
      {3, "gain invariance", gain_invariance},
      {4, "top-k oracle", top_k_oracle},
      {5, "membership and share integrity fuzz", membership_fuzz},
      {6, "messaging exactly-once", messaging_exactly_once},
      {7, "session counting", session_counting},
      {8, "study-scale end-to-end", study_scale_end_to_end},
      {9, "performance", performance},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.number)) continue;
    Stopwatch clock;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.number, c.title.c_str(), clock.seconds(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
