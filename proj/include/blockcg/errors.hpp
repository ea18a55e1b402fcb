#pragma once

#include <stdexcept>
#include <string>

namespace blockcg {

// Base class for everything this library throws on purpose.
class solver_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class invalid_input_error : public solver_error {
 public:
  using solver_error::solver_error;
};

class dim_error : public solver_error {
 public:
  using solver_error::solver_error;
};

// Gram matrix (or other supposedly SPD coefficient) failed the pivot test.
class singular_gram_error : public solver_error {
 public:
  singular_gram_error(const std::string& what, int pivot)
      : solver_error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

class singular_triangular_error : public solver_error {
 public:
  singular_triangular_error(const std::string& what, int pivot)
      : solver_error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

class parse_error : public solver_error {
 public:
  parse_error(const std::string& what, long line)
      : solver_error(what + " at line " + std::to_string(line)), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class precond_build_error : public solver_error {
 public:
  using solver_error::solver_error;
};

// BF-BCG truncated every direction; the solver cannot continue.
class empty_direction_error : public solver_error {
 public:
  using solver_error::solver_error;
};

}  // namespace blockcg
