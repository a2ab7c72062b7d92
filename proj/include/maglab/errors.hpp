//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file errors.hpp
//---------------------------------------------------------------------------//
#pragma once

#include <stdexcept>
#include <string>

namespace maglab {

//! Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Invalid input (bad parameters, unsupported configuration).
class ValidationError : public Error {
 public:
  using Error::Error;
};

//! A point lies outside every chart of the surface.
class DomainError : public Error {
 public:
  using Error::Error;
};

//! Operation not defined for this surface or input.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

//! Base class for numerical failures (exit code 3 in the CLI).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class StiffnessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoReturnError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NewtonDivergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ContinuationLost : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ResonantJet : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EnergyDriftError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

//! A sampled perturbation direction violated the lower bound on the response.
class CotaViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace maglab
