#pragma once

#include <stdexcept>
#include <string>

namespace macrosup {

// Base class for library errors that are not simple argument mistakes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable file content.
class DataFormatError : public Error {
 public:
  using Error::Error;
};

// A document or file declares a format/schema version this build does not understand.
class VersionError : public DataFormatError {
 public:
  using DataFormatError::DataFormatError;
};

// Numeric or statistical failure: root bracketing, depleted statistics, and similar.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A binning region holds too few samples (or too little analytic mass) to
// compute the statistics the caller asked for. `region` is -1, 0 or +1.
class InsufficientRegionSamples : public NumericError {
 public:
  InsufficientRegionSamples(int region_index, const std::string& what)
      : NumericError(what), region(region_index) {}
  int region;
};

}  // namespace macrosup
