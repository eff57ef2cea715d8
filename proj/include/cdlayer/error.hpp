#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdlayer {

/// Failure categories surfaced by the library. The CLI maps some of these to
/// distinct exit codes.
enum class ErrorKind {
    Parameter,         ///< argument outside its documented domain
    Configuration,     ///< missing or inconsistent inputs (e.g. no exact solution)
    Evaluation,        ///< a user function returned a non-finite value
    Convergence,       ///< iterative procedure exhausted its budget
    OutOfRange,        ///< root-finding target outside the function's range
    DegenerateRegime,  ///< transition point too large for a layer-adapted mesh
    Resource,          ///< node count cap exceeded
    Singular,          ///< linear system could not be solved
    Assembly,          ///< non-finite entry while assembling
    Shape,             ///< mismatched meshes or array sizes
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace cdlayer
