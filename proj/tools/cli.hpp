// tools/cli.hpp

// Copyright 2026  The abxeval Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ABXEVAL_CLI_HPP_
#define ABXEVAL_CLI_HPP_

#include <string>
#include <vector>

namespace abx::cli {

// Runs the command line (without the program name). Exit codes:
//   0 success, 1 nothing evaluable, 2 input or validation error.
int run(const std::vector<std::string>& args);

}  // namespace abx::cli

#endif  // ABXEVAL_CLI_HPP_
