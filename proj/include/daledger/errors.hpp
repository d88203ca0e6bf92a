#pragma once

#include <stdexcept>
#include <string>

namespace daledger {

/// Base of every error this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A leaf payload is larger than the configured maximum leaf size.
class OversizedLeaf : public Error {
public:
    using Error::Error;
};

/// Two sibling subtrees are out of namespace order (left.max > right.min).
class OrderingViolation : public Error {
public:
    using Error::Error;
};

/// A message list handed to tree construction is not namespace-sorted.
class UnsortedInput : public OrderingViolation {
public:
    using OrderingViolation::OrderingViolation;
};

/// Share data could not be parsed back into messages.
class MalformedShares : public Error {
public:
    using Error::Error;
};

/// A fraud proof was requested for a line that is correctly coded.
class NotFraudulent : public Error {
public:
    using Error::Error;
};

/// The message set needs a larger square than the field supports.
class BlockTooLarge : public Error {
public:
    using Error::Error;
};

/// Probability helpers were called with out-of-range parameters.
class DomainError : public Error {
public:
    using Error::Error;
};

/// No sample count up to n reaches the requested coverage.
class Infeasible : public Error {
public:
    using Error::Error;
};

/// A storage peer answered with a proof that does not verify.
class PeerMisbehavior : public Error {
public:
    using Error::Error;
};

/// A scenario or benchmark configuration violates its invariants.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace daledger
