// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace fsiren {

// Base error for everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or usage (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Numerical failure during optimization (CLI exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
};

// File / data I/O failure (CLI exit code 4).
class IoError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void concat_into(std::ostringstream&) {}

template <class T, class... Rest>
void concat_into(std::ostringstream& os, T&& v, Rest&&... rest)
{
    os << std::forward<T>(v);
    concat_into(os, std::forward<Rest>(rest)...);
}

} // namespace detail

template <class... Args>
std::string concat(Args&&... args)
{
    std::ostringstream os;
    detail::concat_into(os, std::forward<Args>(args)...);
    return os.str();
}

template <class E, class... Args>
[[noreturn]] void fail(Args&&... args)
{
    throw E(concat(std::forward<Args>(args)...));
}

#define FSN_CHECK(cond, ...) \
    do { if (!(cond)) ::fsiren::fail<::fsiren::Error>(__VA_ARGS__); } while (0)
#define FSN_CHECK_CONFIG(cond, ...) \
    do { if (!(cond)) ::fsiren::fail<::fsiren::ConfigError>(__VA_ARGS__); } while (0)
#define FSN_CHECK_IO(cond, ...) \
    do { if (!(cond)) ::fsiren::fail<::fsiren::IoError>(__VA_ARGS__); } while (0)
#define FSN_CHECK_NUMERIC(cond, ...) \
    do { if (!(cond)) ::fsiren::fail<::fsiren::NumericError>(__VA_ARGS__); } while (0)

// Shortest round-trip decimal form, byte-stable across runs for identical doubles.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace fsiren
