#pragma once

#include <stdexcept>
#include <string>

namespace gazefake {

// Exit-code classes used by the command line: usage = 1, data = 2, invariant = 3.
enum class ErrorClass { Usage = 1, Data = 2, Invariant = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

#define GAZEFAKE_DEFINE_ERROR(Name, Class)                                                   \
    class Name : public Error {                                                              \
    public:                                                                                  \
        explicit Name(const std::string& what) : Error(ErrorClass::Class, #Name ": " + what) {} \
    };

GAZEFAKE_DEFINE_ERROR(UsageError, Usage)
GAZEFAKE_DEFINE_ERROR(IoError, Data)
GAZEFAKE_DEFINE_ERROR(MalformedHeader, Data)
GAZEFAKE_DEFINE_ERROR(EmptyTrack, Data)
GAZEFAKE_DEFINE_ERROR(NonUnitDirection, Data)
GAZEFAKE_DEFINE_ERROR(InvalidRecord, Data)
GAZEFAKE_DEFINE_ERROR(OutOfRangeChannel, Data)
GAZEFAKE_DEFINE_ERROR(LengthMismatch, Data)
GAZEFAKE_DEFINE_ERROR(InvalidWindow, Data)
GAZEFAKE_DEFINE_ERROR(BadMagic, Data)
GAZEFAKE_DEFINE_ERROR(VersionMismatch, Data)
GAZEFAKE_DEFINE_ERROR(ShapeMismatch, Data)
GAZEFAKE_DEFINE_ERROR(SingleClassDataset, Data)
GAZEFAKE_DEFINE_ERROR(MixedOmega, Data)
GAZEFAKE_DEFINE_ERROR(EmptyPrediction, Data)
GAZEFAKE_DEFINE_ERROR(EmptyDataset, Data)
GAZEFAKE_DEFINE_ERROR(EmptyPerturbationList, Usage)
GAZEFAKE_DEFINE_ERROR(InvariantViolation, Invariant)

#undef GAZEFAKE_DEFINE_ERROR

// Unparseable line in a track file. Line numbers are 1-based.
class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line, const std::string& what)
        : Error(ErrorClass::Data, "MalformedRecord: line " + std::to_string(line) + ": " + what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace gazefake
