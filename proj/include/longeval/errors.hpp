#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace longeval {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyBookError : public Error {
 public:
  EmptyBookError() : Error("book body is empty") {}
};

// Malformed coreference annotation; carries the byte offset of the defect.
class ParseError : public Error {
 public:
  ParseError(std::string what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EmptyContextError : public Error {
 public:
  EmptyContextError() : Error("context text is empty") {}
};

class NoQuestionsParsedError : public Error {
 public:
  NoQuestionsParsedError() : Error("no question/answer pairs parsed") {}
};

class MissingContextError : public Error {
 public:
  explicit MissingContextError(const std::string& what) : Error(what) {}
};

// Mock backend received a request no scripted rule matches.
class MockMissError : public Error {
 public:
  explicit MockMissError(const std::string& what) : Error(what) {}
};

class BackendUnavailableError : public Error {
 public:
  explicit BackendUnavailableError(const std::string& what) : Error(what) {}
};

// HTTP endpoint kept returning a non-success status after retries.
class BackendHttpError : public Error {
 public:
  BackendHttpError(int status, const std::string& body)
      : Error("backend returned HTTP " + std::to_string(status) +
              (body.empty() ? "" : ": " + body.substr(0, 200))),
        status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class VerdictParseError : public Error {
 public:
  explicit VerdictParseError(const std::string& what) : Error(what) {}
};

class DegenerateComparisonGraphError : public Error {
 public:
  explicit DegenerateComparisonGraphError(const std::string& what)
      : Error(what) {}
};

class DegenerateMarginalsError : public Error {
 public:
  DegenerateMarginalsError()
      : Error("chance agreement is 1 while observed agreement is not") {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// A pipeline stage could not find or verify an upstream artifact.
class ArtifactError : public Error {
 public:
  ArtifactError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace longeval
