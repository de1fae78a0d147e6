// Copyright 2026 The Crowneval Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef CROWNEVAL_IO_UTIL_H_
#define CROWNEVAL_IO_UTIL_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace crowneval {

using Json = nlohmann::json;

// IoError when the file cannot be read.
std::string ReadTextFile(const std::filesystem::path& path);

// IoError when unreadable, ValidationError when not valid JSON.
Json ReadJsonFile(const std::filesystem::path& path);

// Writes through a temporary sibling and renames, so readers never see a
// partial file. Creates parent directories. IoError on failure.
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

// Canonical form: keys sorted, two-space indent, trailing newline.
std::string CanonicalJson(const Json& j);

}  // namespace crowneval

#endif  // CROWNEVAL_IO_UTIL_H_
