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

#ifndef HSTK_TEXTIO_HPP_
#define HSTK_TEXTIO_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hstk/hst.hpp"

namespace hstk {

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
void append_double(std::string& out, double x);

struct TextLine {
  int number = 0;
  std::vector<std::string> tokens;
};

// Splits text into whitespace-separated records, skipping blank lines and
// '#' comments. Line numbers are 1-based.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}
  std::optional<TextLine> next();
  int last_line() const { return line_; }

 private:
  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 0;
};

// 64-bit FNV-1a, used for instance and trace digests.
uint64_t fnv1a64(std::string_view data, uint64_t seed = 14695981039346656037ull);
std::string hex64(uint64_t x);

double parse_double(const std::string& tok, int line);
int64_t parse_int(const std::string& tok, int line);
NodeSpec parse_node_record(const TextLine& line);

}  // namespace hstk

#endif  // HSTK_TEXTIO_HPP_
