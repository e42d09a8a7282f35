// Copyright 2026 The dpkan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPKAN_CLI_HPP
#define DPKAN_CLI_HPP

#include <ostream>

namespace dpkan {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation or runtime error
inline constexpr int kExitUsage = 2;    // unknown subcommand or flag

/// Entry point of the `dpkan` tool. Errors are reported on `err` as a single
/// line "error: <kind>: <message>".
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpkan

#endif  // DPKAN_CLI_HPP
