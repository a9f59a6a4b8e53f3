// Copyright (c) 2026, the fovea authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FOVEA_ERRORS_HPP_
#define FOVEA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fovea {

/// Base class for all library errors. Subclasses carry no extra state
/// beyond the message; catch the specific type when the caller can react.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class SingularTransform : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `offset` is the byte position where parsing failed
/// (or the closest known position).
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class MissingEmbedding : public Error {
 public:
  explicit MissingEmbedding(const std::string& id)
      : Error("missing embedding for id '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error("duplicate id '" + id + "'") {}
};

class CapabilityError : public Error {
 public:
  using Error::Error;
};

class DegenerateEmbedding : public Error {
 public:
  explicit DegenerateEmbedding(const std::string& id)
      : Error("zero-norm embedding for sample '" + id + "'") {}
};

class DegenerateBaseline : public Error {
 public:
  using Error::Error;
};

class IncompleteGrid : public Error {
 public:
  using Error::Error;
};

class CatalogMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyUnion : public Error {
 public:
  using Error::Error;
};

class UnknownClass : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fovea

#endif  // FOVEA_ERRORS_HPP_
