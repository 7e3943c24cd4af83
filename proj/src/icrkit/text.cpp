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

#include "icrkit/text.hpp"

#include <algorithm>

namespace icrkit::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool InRange(char32_t c, char32_t lo, char32_t hi) {
  return c >= lo && c <= hi;
}

char AsciiLowerChar(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

std::u32string DecodeUtf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int extra = 0;
    char32_t cp = 0;
    char32_t min_cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
      extra = 1; cp = b0 & 0x1F; min_cp = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2; cp = b0 & 0x0F; min_cp = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3; cp = b0 & 0x07; min_cp = 0x10000;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + extra >= s.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp < min_cp || cp > 0x10FFFF || InRange(cp, 0xD800, 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string EncodeUtf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool IsSpace(char32_t c) {
  return c == ' ' || InRange(c, 0x09, 0x0D) || c == 0x85 || c == 0xA0 ||
         c == 0x1680 || InRange(c, 0x2000, 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool IsPunctuation(char32_t c) {
  if (c < 0x80) {
    return InRange(c, 0x21, 0x2F) || InRange(c, 0x3A, 0x40) ||
           InRange(c, 0x5B, 0x60) || InRange(c, 0x7B, 0x7E);
  }
  return InRange(c, 0xA1, 0xBF) || c == 0xD7 || c == 0xF7 ||
         InRange(c, 0x2010, 0x2027) || InRange(c, 0x2030, 0x205E) ||
         InRange(c, 0x3001, 0x303F) || InRange(c, 0xFF01, 0xFF0F) ||
         InRange(c, 0xFF1A, 0xFF20) || InRange(c, 0xFF3B, 0xFF40) ||
         InRange(c, 0xFF5B, 0xFF65);
}

char32_t ToLower(char32_t c) {
  if (InRange(c, 'A', 'Z')) return c + 0x20;
  if (InRange(c, 0xC0, 0xDE) && c != 0xD7) return c + 0x20;
  if (InRange(c, 0x391, 0x3A9) && c != 0x3A2) return c + 0x20;
  if (InRange(c, 0x410, 0x42F)) return c + 0x20;
  if (InRange(c, 0x400, 0x40F)) return c + 0x50;
  return c;
}

std::string_view Trim(std::string_view s) {
  constexpr std::string_view kWs = " \t\n\r\f\v";
  const size_t b = s.find_first_not_of(kWs);
  if (b == std::string_view::npos) return {};
  const size_t e = s.find_last_not_of(kWs);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> SplitWhitespace(std::string_view s) {
  // Byte-level scan for ASCII whitespace, plus the multi-byte spaces that
  // IsSpace recognizes. Decoding only happens on non-ASCII lead bytes.
  std::vector<std::string_view> out;
  size_t i = 0;
  size_t start = std::string_view::npos;
  while (i < s.size()) {
    size_t len = 1;
    bool space = false;
    const auto b = static_cast<unsigned char>(s[i]);
    if (b < 0x80) {
      space = IsSpace(b);
    } else {
      len = (b & 0xE0) == 0xC0 ? 2 : (b & 0xF0) == 0xE0 ? 3
            : (b & 0xF8) == 0xF0 ? 4 : 1;
      len = std::min(len, s.size() - i);
      const auto cps = DecodeUtf8(s.substr(i, len));
      space = cps.size() == 1 && IsSpace(cps[0]);
      if (cps.size() != 1) len = 1;
    }
    if (space) {
      if (start != std::string_view::npos) {
        out.push_back(s.substr(start, i - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = i;
    }
    i += len;
  }
  if (start != std::string_view::npos) out.push_back(s.substr(start));
  return out;
}

std::vector<std::u32string_view> SplitWhitespace(std::u32string_view s) {
  std::vector<std::u32string_view> out;
  size_t start = std::u32string_view::npos;
  for (size_t i = 0; i < s.size(); ++i) {
    if (IsSpace(s[i])) {
      if (start != std::u32string_view::npos) {
        out.push_back(s.substr(start, i - start));
        start = std::u32string_view::npos;
      }
    } else if (start == std::u32string_view::npos) {
      start = i;
    }
  }
  if (start != std::u32string_view::npos) out.push_back(s.substr(start));
  return out;
}

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = AsciiLowerChar(c);
  return out;
}

size_t FindNoCase(std::string_view haystack, std::string_view needle,
                  size_t from) {
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (size_t k = 0; k < needle.size(); ++k) {
      if (AsciiLowerChar(haystack[i + k]) != AsciiLowerChar(needle[k])) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

size_t RFindNoCase(std::string_view haystack, std::string_view needle) {
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (size_t i = haystack.size() - needle.size() + 1; i-- > 0;) {
    bool match = true;
    for (size_t k = 0; k < needle.size(); ++k) {
      if (AsciiLowerChar(haystack[i + k]) != AsciiLowerChar(needle[k])) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

std::vector<std::string_view> SplitLines(std::string_view s) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(s.substr(start));
      break;
    }
    lines.push_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace icrkit::text
