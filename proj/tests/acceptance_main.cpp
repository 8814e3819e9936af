// SPDX-License-Identifier: Apache-2.0
//
// msloc - frequency-domain localization of uniformly moving tonal sources
// Copyright (C) 2026 The msloc contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Runs every acceptance check and prints one line per check.
// Usage: msloc_acceptance [work_dir] [check ids...]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "acceptance/acceptance.hpp"

int main(int argc, char** argv) {
  msloc::acceptance::Options opts;
  opts.work_dir = argc > 1 ? argv[1] : "acceptance_work";
  for (int i = 2; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
  opts.on_result = [](const msloc::acceptance::CheckResult& r) {
    std::printf("%s\n", msloc::acceptance::format_line(r).c_str());
    std::fflush(stdout);
  };
  const auto results = msloc::acceptance::run(opts);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%zu/%zu acceptance checks passed\n", results.size() - failed, results.size());
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
