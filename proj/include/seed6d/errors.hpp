#pragma once

#include <stdexcept>
#include <string>

namespace seed6d {

// Base of every error raised by the library. Controllers and the simulator
// fail loudly instead of emitting NaN commands.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |cos p| fell below the gimbal tolerance.
class GimbalLock : public Error {
 public:
  using Error::Error;
};

// An inverse produced a pose outside the valid gimbal domain.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

// Frames were composed with mismatched inner labels.
class FrameMismatch : public Error {
 public:
  using Error::Error;
};

class NoContact : public Error {
 public:
  using Error::Error;
};

class DegeneratePatches : public Error {
 public:
  using Error::Error;
};

class DegenerateFrame : public Error {
 public:
  using Error::Error;
};

class InsufficientFlow : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace seed6d
