#pragma once

#include <stdexcept>
#include <string>

namespace pack3d {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfBounds : public Error {
 public:
  using Error::Error;
};

class HeightOverflow : public Error {
 public:
  using Error::Error;
};

class InvalidSequence : public Error {
 public:
  using Error::Error;
};

class EpisodeDone : public Error {
 public:
  EpisodeDone() : Error("episode is already done") {}
};

class NoFeasible : public Error {
 public:
  NoFeasible() : Error("no feasible placement for the current item") {}
};

class CutFailure : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace pack3d
