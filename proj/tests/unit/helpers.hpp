#pragma once
#include <gtest/gtest.h>

#include <functional>

#include "lithub/error.hpp"

namespace lithub::testing {

// Code of the lithub::Error thrown by f; records a failure when none is.
inline Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lithub::Error thrown";
  return Errc::BadInput;
}

}  // namespace lithub::testing
