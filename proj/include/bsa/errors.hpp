/*
 Copyright 2026 The BSA Toolkit Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef BSA_ERRORS_HPP
#define BSA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bsa {

/// Malformed configuration or parameter input (bad key, bad value, bad file).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite state, singular system, or other numerical breakdown at runtime.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The NLP solver failed to produce an acceptable point.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A batch run finished, but some of its points failed.
class PartialFailure : public std::runtime_error {
public:
    explicit PartialFailure(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace bsa

#endif // BSA_ERRORS_HPP
