#pragma once

#include "perfcharter/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef PERFCHARTER_DATA_DIR
#define PERFCHARTER_DATA_DIR "data"
#endif

inline std::string read_data(const std::string &name) {
    std::ifstream in(std::filesystem::path(PERFCHARTER_DATA_DIR) / name, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing data file " << name);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

template <class F>
perfcharter::ErrorKind error_kind(F &&f) {
    try {
        f();
    } catch (const perfcharter::Error &e) {
        return e.kind();
    }
    FAIL("expected a perfcharter::Error");
    return perfcharter::ErrorKind::Io;
}

#define CHECK_ERROR(expr, kind) CHECK(error_kind([&] { (void)(expr); }) == perfcharter::ErrorKind::kind)
