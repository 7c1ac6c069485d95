#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "bleu_oracle.hpp"
#include "doctest.h"
#include "files.hpp"
#include "l2m3/error.hpp"

namespace test_support {

// Code of the l2m3::Error thrown by fn; fails the test when nothing is thrown.
inline l2m3::Errc error_of(auto && fn) {
    try {
        fn();
    } catch (const l2m3::Error & e) {
        return e.code();
    }
    FAIL("expected an l2m3::Error");
    return l2m3::Errc::Io;
}

} // namespace test_support
