// Copyright 2026 The hstk Authors.
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

#include "hstk/textio.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "hstk/errors.hpp"

namespace hstk {

void append_double(std::string& out, double x) {
  char buf[32];
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  auto r = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, r.ptr);
}

std::string format_double(double x) {
  std::string s;
  append_double(s, x);
  return s;
}

std::optional<TextLine> LineReader::next() {
  while (pos_ < text_.size()) {
    size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    std::string_view raw = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_;
    if (auto hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    TextLine out;
    out.number = line_;
    size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      if (j > i) out.tokens.emplace_back(raw.substr(i, j - i));
      i = j;
    }
    if (!out.tokens.empty()) return out;
  }
  return std::nullopt;
}

uint64_t fnv1a64(std::string_view data, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t x) {
  static const char* kDigits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) out[i] = kDigits[x & 15];
  return out;
}

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError(line, "expected a number, got '" + tok + "'");
  return v;
}

int64_t parse_int(const std::string& tok, int line) {
  int64_t v = 0;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
    throw ParseError(line, "expected an integer, got '" + tok + "'");
  return v;
}

NodeSpec parse_node_record(const TextLine& line) {
  if (line.tokens.size() != 4)
    throw ParseError(line.number, "expected 'node <id> <parent|-> <level>'");
  NodeSpec s;
  s.id = line.tokens[1];
  if (s.id == "-" || s.id[0] == '~')
    throw ParseError(line.number, "invalid node id '" + s.id + "'");
  if (line.tokens[2] != "-") s.parent = line.tokens[2];
  int64_t lvl = parse_int(line.tokens[3], line.number);
  if (lvl < 0 || lvl > 64) throw ParseError(line.number, "level out of range");
  s.level = static_cast<int>(lvl);
  return s;
}

}  // namespace hstk
