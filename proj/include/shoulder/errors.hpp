#pragma once

#include <stdexcept>
#include <string>

namespace shoulder {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ModelError : public Error {
public:
  using Error::Error;
};

class UnknownLink : public Error {
public:
  explicit UnknownLink(const std::string& name) : Error("unknown link: " + name) {}
};

class UnknownJoint : public Error {
public:
  explicit UnknownJoint(const std::string& name) : Error("unknown joint: " + name) {}
};

class UnknownGroup : public Error {
public:
  explicit UnknownGroup(const std::string& name) : Error("unknown group: " + name) {}
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Iterative solver stopped without meeting its tolerance.
class NoConvergence : public Error {
public:
  NoConvergence(const std::string& what, double final_error, int pass = 0)
      : Error(what), final_error_(final_error), pass_(pass) {}
  double final_error() const { return final_error_; }
  /// 1 or 2 for the two passes of the rhythm solver, 0 otherwise.
  int pass() const { return pass_; }

private:
  double final_error_;
  int pass_;
};

class NonFinite : public Error {
public:
  NonFinite(const std::string& what, int epoch = -1) : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

private:
  int epoch_;
};

class NoSettle : public Error {
public:
  NoSettle(const std::string& what, int iterations) : Error(what), iterations_(iterations) {}
  int iterations() const { return iterations_; }

private:
  int iterations_;
};

class MarkerNotVisible : public Error {
public:
  explicit MarkerNotVisible(const std::string& id) : Error("marker not visible: " + id) {}
};

/// Snapshot was produced for a different group layout.
class LayoutMismatch : public Error {
public:
  using Error::Error;
};

}  // namespace shoulder
