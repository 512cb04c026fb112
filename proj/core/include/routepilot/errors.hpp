#pragma once

#include <stdexcept>
#include <string>

namespace routepilot {

// Base for everything the library throws on bad input or failed invariants.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Latitude too close to a pole for the flat-earth approximation.
class PolarRegionError : public Error {
 public:
  using Error::Error;
};

// Longitude difference crosses the antimeridian.
class AntimeridianError : public Error {
 public:
  using Error::Error;
};

// Aim point too close to the vehicle to define a heading.
class DegenerateAimError : public Error {
 public:
  using Error::Error;
};

class NonPositiveAlphaError : public Error {
 public:
  using Error::Error;
};

// Not enough future ticks left in a record to build ground-truth waypoints.
class EndOfRecordError : public Error {
 public:
  using Error::Error;
};

// Malformed file, missing field, unreadable path.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace routepilot
