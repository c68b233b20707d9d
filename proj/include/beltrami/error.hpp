#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace beltrami {

/// Base class of every error raised by the library. Messages are prefixed
/// with the failing operation, e.g. "fields::catalog_lookup: ...".
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error { using Error::Error; };
class UnsupportedOperation : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class IncompatibleDomain : public Error { using Error::Error; };
class CatalogError : public Error { using Error::Error; };
class ZeroFieldError : public Error { using Error::Error; };

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class StencilOutOfDomain : public Error { using Error::Error; };

/// Field line left the ball (non-tangent field).
class EscapeError : public Error { using Error::Error; };
/// Step size underflow in the adaptive integrator.
class StiffnessError : public Error { using Error::Error; };

class OrderUndetermined : public Error { using Error::Error; };
class InteriorOnlyError : public Error { using Error::Error; };
class InsufficientData : public Error { using Error::Error; };
class EmptySetError : public Error { using Error::Error; };
class DegenerateFieldError : public Error { using Error::Error; };

class NotTangentError : public Error { using Error::Error; };
class NotClosedError : public Error { using Error::Error; };

} // namespace beltrami
