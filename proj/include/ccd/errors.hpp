#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include <stdexcept>
#include <string>

namespace ccd {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- distribution algebra ----

class NonFiniteLogit : public Error {
 public:
  using Error::Error;
};

class VocabTooSmall : public Error {
 public:
  using Error::Error;
};

class VocabMismatch : public Error {
 public:
  using Error::Error;
};

class NegativeAlpha : public Error {
 public:
  using Error::Error;
};

class KOutOfRange : public Error {
 public:
  using Error::Error;
};

// ---- strategies ----

class BadHyperparameter : public Error {
 public:
  using Error::Error;
};

class EmptyQuery : public Error {
 public:
  using Error::Error;
};

// ---- LM sources. SourceError is the umbrella the decode loop propagates.

class SourceError : public Error {
 public:
  using Error::Error;
};

class StepOutOfRange : public SourceError {
 public:
  using SourceError::SourceError;
};

class UnknownTokenId : public SourceError {
 public:
  using SourceError::SourceError;
};

class EmptyCorpus : public SourceError {
 public:
  using SourceError::SourceError;
};

class ProtocolError : public SourceError {
 public:
  using SourceError::SourceError;
};

class TransportError : public SourceError {
 public:
  using SourceError::SourceError;
};

class TimeoutError : public SourceError {
 public:
  using SourceError::SourceError;
};

/// An error object reported by a remote logit server.
class ServerError : public SourceError {
 public:
  using SourceError::SourceError;
};

// ---- benchmark generation ----

class PoolTooSmall : public Error {
 public:
  using Error::Error;
};

class ModelRequired : public Error {
 public:
  using Error::Error;
};

class BadConfig : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---- evaluation ----

class EmptyRun : public Error {
 public:
  using Error::Error;
};

class MissingLabel : public Error {
 public:
  using Error::Error;
};

/// Malformed line in a results file; carries the 1-based line number.
class ResultsFormatError : public Error {
 public:
  ResultsFormatError(const std::string& what, std::size_t line)
      : Error(what), line_number(line) {}
  std::size_t line_number;
};

}  // namespace ccd
