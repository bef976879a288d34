/* Copyright 2026 The tdconv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace tdconv {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero or overflowing tensor dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Index or window outside a tensor.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// A layer's shape precondition does not hold. When the failure happens
// inside a network, layer_index() names the offending layer.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(what) {}
  ShapeError(std::size_t layer_index, const std::string& what)
      : Error("layer " + std::to_string(layer_index) + ": " + what),
        layer_index_(layer_index) {}

  std::optional<std::size_t> layer_index() const { return layer_index_; }

 private:
  std::optional<std::size_t> layer_index_;
};

// Utterance shorter than the receptive field of the network.
class InputTooShortError : public Error {
 public:
  InputTooShortError(std::size_t length, std::size_t required)
      : Error("input of " + std::to_string(length) +
              " frames is shorter than the receptive field of " +
              std::to_string(required) + " frames"),
        length_(length),
        required_(required) {}

  std::size_t length() const { return length_; }
  std::size_t required() const { return required_; }

 private:
  std::size_t length_;
  std::size_t required_;
};

// Rewrite requested on a network in the wrong mode (e.g. densify of a dense
// network).
class ModeError : public Error {
 public:
  using Error::Error;
};

// Syntax error in a network description; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Malformed tensor dump or other I/O failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdconv
