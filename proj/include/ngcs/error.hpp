#ifndef NGCS_ERROR_HPP
#define NGCS_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ngcs {

/// Bad input: wrong shapes, out-of-range parameters, malformed files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed line in an input file. `line()` is 1-based.
class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : InvalidArgument(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An iterative kernel gave up. Carries the best residual it reached.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// NG-reg cannot fit a model on an empty selected set.
class EmptySelection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}
}  // namespace detail

}  // namespace ngcs

#endif  // NGCS_ERROR_HPP
