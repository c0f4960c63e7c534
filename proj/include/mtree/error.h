// Copyright 2026 The Authors.
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

#ifndef MTREE_ERROR_H_
#define MTREE_ERROR_H_

#include <stdexcept>
#include <string>

namespace mtree {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// M^D cannot hold the requested labels, or a child capacity is exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// No assignment satisfies the node's size constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class UnknownLabelError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A statistic was queried for a (node, label) pair with zero count.
class NoDataError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Malformed model files or corpora.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtree

#endif  // MTREE_ERROR_H_
