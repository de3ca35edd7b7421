// Copyright 2026 The voxprotect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small text helpers shared by the delimited-file readers and writers.

#ifndef VOXPROTECT_SRC_TEXT_UTIL_H_
#define VOXPROTECT_SRC_TEXT_UTIL_H_

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace voxprotect::text {

std::vector<std::string> SplitRow(std::string_view line, char sep);
std::string Trim(std::string_view s);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);
// Strict parse of a full field; throws DataError naming `what`.
double ParseDouble(std::string_view field, std::string_view what);

std::string JoinTags(const std::set<std::string>& tags);
std::set<std::string> ParseTags(std::string_view field);

std::string ReadTextFile(const std::string& path);
// Creates parent directories as needed.
void WriteTextFile(const std::string& path, std::string_view text);

}  // namespace voxprotect::text

#endif  // VOXPROTECT_SRC_TEXT_UTIL_H_
