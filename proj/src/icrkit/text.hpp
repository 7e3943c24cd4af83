// Copyright 2026 The icrkit Authors.
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

// Small UTF-8 and string helpers shared by the matching and parsing code.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace icrkit::text {

// Lenient decoder: every malformed byte becomes U+FFFD.
std::u32string DecodeUtf8(std::string_view s);
std::string EncodeUtf8(std::u32string_view s);

bool IsSpace(char32_t c);
bool IsPunctuation(char32_t c);
char32_t ToLower(char32_t c);

std::string_view Trim(std::string_view s);
// Splits on ASCII and Unicode whitespace; empty runs are skipped.
std::vector<std::string_view> SplitWhitespace(std::string_view s);
std::vector<std::u32string_view> SplitWhitespace(std::u32string_view s);

std::string AsciiLower(std::string_view s);
// ASCII case-insensitive search. Returns npos when absent.
size_t FindNoCase(std::string_view haystack, std::string_view needle,
                  size_t from = 0);
size_t RFindNoCase(std::string_view haystack, std::string_view needle);

std::vector<std::string_view> SplitLines(std::string_view s);

}  // namespace icrkit::text
