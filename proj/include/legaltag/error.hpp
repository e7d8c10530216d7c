#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace legaltag {

// Malformed CoNLL-U or bracketed input. `line` is 1-based (0 when unknown),
// `offset` is a 0-based character offset (npos when unknown).
class ParseError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  ParseError(const std::string& what, std::size_t line, std::size_t offset = npos)
      : std::runtime_error(what), line_(line), offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

// A dependency graph whose head-of relation still loops after acl pruning.
class CycleError : public std::runtime_error {
 public:
  CycleError(const std::string& what, std::size_t token)
      : std::runtime_error(what), token_(token) {}

  std::size_t token() const noexcept { return token_; }

 private:
  std::size_t token_;
};

// Taxonomy, embedding, aspect, tag or index files that cannot be loaded.
class LoadError : public std::runtime_error {
 public:
  explicit LoadError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace legaltag
