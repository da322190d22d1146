// SPDX-License-Identifier: Apache-2.0
//
// statmap: statistical radio maps for reliable rate selection
// Copyright (C) 2026 The statmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef STATMAP_ERRORS_HPP
#define STATMAP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace statmap
{
    // Every failure raised by the library derives from Error. The C API maps
    // the concrete type onto a statmap_status code.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Invalid configuration or argument values.
    class ConfigError : public Error
    {
    public:
        using Error::Error;
    };

    // Argument outside the mathematical domain of a function.
    class DomainError : public ConfigError
    {
    public:
        using ConfigError::ConfigError;
    };

    // Fewer samples than the estimator needs. Carries the required minimum.
    class InsufficientSamples : public Error
    {
    public:
        InsufficientSamples(std::size_t have, std::size_t required)
            : Error("insufficient samples: have " + std::to_string(have) +
                    ", need at least " + std::to_string(required)),
              have_(have), required_(required) {}
        InsufficientSamples(const std::string &context, std::size_t have, std::size_t required)
            : Error(context + ": insufficient samples: have " + std::to_string(have) +
                    ", need at least " + std::to_string(required)),
              have_(have), required_(required) {}

        std::size_t have() const noexcept { return have_; }
        std::size_t required() const noexcept { return required_; }

    private:
        std::size_t have_;
        std::size_t required_;
    };

    // Cholesky failure, optimizer or training divergence, non-finite values.
    class NumericalError : public Error
    {
    public:
        using Error::Error;
    };

    // Malformed or unsupported file contents.
    class ParseError : public Error
    {
    public:
        using Error::Error;
    };

    // File system failures.
    class IoError : public Error
    {
    public:
        using Error::Error;
    };
}

#endif
