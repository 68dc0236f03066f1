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

#ifndef HSTK_ERRORS_HPP_
#define HSTK_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace hstk {

// Input errors surface as exit code 3 in the CLI; everything deriving from
// RunAbort signals a broken invariant and maps to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedTree : public Error { using Error::Error; };
class LambdaTooSmall : public Error { using Error::Error; };
class DegenerateMetric : public Error { using Error::Error; };
class UnknownNode : public Error { using Error::Error; };
class DuplicateTime : public Error { using Error::Error; };
class ParamViolation : public Error { using Error::Error; };
class GraphTooLarge : public Error { using Error::Error; };
class TooManyCombinations : public Error { using Error::Error; };

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class RunAbort : public Error { using Error::Error; };
class NonPositiveRhs : public RunAbort { using RunAbort::RunAbort; };
class NoAwakeTimestep : public RunAbort { using RunAbort::RunAbort; };
class InsufficientMass : public RunAbort { using RunAbort::RunAbort; };
class NoActiveLeaves : public RunAbort { using RunAbort::RunAbort; };
class InfeasibleGather : public RunAbort { using RunAbort::RunAbort; };
class NotSlack : public RunAbort { using RunAbort::RunAbort; };
class ChildMissing : public RunAbort { using RunAbort::RunAbort; };
class InvariantBreach : public RunAbort { using RunAbort::RunAbort; };

}  // namespace hstk

#endif  // HSTK_ERRORS_HPP_
