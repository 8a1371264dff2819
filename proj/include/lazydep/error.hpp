#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lazydep {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. `offset` is a byte offset into the parsed text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// An extensional operation was asked to enumerate more than its cap allows.
class CapExceededError : public Error {
 public:
  CapExceededError(std::size_t size, std::size_t cap)
      : Error("feature count " + std::to_string(size) + " exceeds enumeration cap " +
              std::to_string(cap)),
        size_(size),
        cap_(cap) {}
  std::size_t size() const { return size_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t size_;
  std::size_t cap_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class RepositoryError : public Error {
 public:
  using Error::Error;
};

// The request mentions features that no fragment declares.
class UnknownFeatureError : public Error {
 public:
  explicit UnknownFeatureError(std::vector<std::string> names)
      : Error(describe(names)), names_(std::move(names)) {}
  const std::vector<std::string>& names() const { return names_; }

 private:
  static std::string describe(const std::vector<std::string>& names) {
    std::string out = "unknown feature(s):";
    for (const auto& n : names) out += " " + n;
    return out;
  }
  std::vector<std::string> names_;
};

}  // namespace lazydep
