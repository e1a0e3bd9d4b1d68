#pragma once

#include <stdexcept>
#include <string>

namespace medimark {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- image I/O and geometry ---

class MalformedHeader : public Error {
public:
    using Error::Error;
};

class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

class TruncatedData : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class OddHighSample : public Error {
public:
    using Error::Error;
};

class RoiOutOfBounds : public Error {
public:
    using Error::Error;
};

// --- feature extraction ---

class NonPositiveSigma : public Error {
public:
    using Error::Error;
};

class ZeroMass : public Error {
public:
    using Error::Error;
};

// --- payload framing and crypto ---

class RecordTooLarge : public Error {
public:
    using Error::Error;
};

class MalformedRecord : public Error {
public:
    using Error::Error;
};

class CrcMismatch : public Error {
public:
    using Error::Error;
};

class KeyFormatError : public Error {
public:
    using Error::Error;
};

// --- watermark pipelines ---

class RoiOverlapsHeader : public Error {
public:
    using Error::Error;
};

class InsufficientCapacity : public Error {
public:
    using Error::Error;
};

class NotWatermarked : public Error {
public:
    using Error::Error;
};

class PayloadUnreadable : public Error {
public:
    using Error::Error;
};

class NothingToLocate : public Error {
public:
    using Error::Error;
};

// --- record store ---

class DuplicateRecord : public Error {
public:
    using Error::Error;
};

class UnknownId : public Error {
public:
    using Error::Error;
};

class CorruptObject : public Error {
public:
    using Error::Error;
};

class NotArchived : public Error {
public:
    using Error::Error;
};

class CorruptIndex : public Error {
public:
    using Error::Error;
};

class StoreLocked : public Error {
public:
    using Error::Error;
};

class StoreIoError : public Error {
public:
    using Error::Error;
};

} // namespace medimark
