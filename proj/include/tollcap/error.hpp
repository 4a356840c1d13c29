#ifndef TOLLCAP_ERROR_HPP_
#define TOLLCAP_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace tollcap {

/// Argument outside the mathematical domain (negative flow, non-finite toll, ...).
class DomainError : public std::domain_error {
 public:
    using std::domain_error::domain_error;
};

/// Vector lengths that do not match the instance.
class ShapeError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

/// A caller-side precondition was violated (e.g. an infeasible flow handed to a checker).
class PreconditionError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

/// The requested method does not apply to this instance (non-affine, no full support, ...).
class NotApplicable : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

/// Malformed instance. Carries the offending link indices (0-based).
class StructuralError : public std::invalid_argument {
 public:
    StructuralError(const std::string& what, std::vector<std::size_t> links = {})
        : std::invalid_argument(what), links_(std::move(links)) {}

    const std::vector<std::size_t>& links() const noexcept { return links_; }

 private:
    std::vector<std::size_t> links_;
};

/// Unreadable input document.
class ParseError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

}  // namespace tollcap

#endif  // TOLLCAP_ERROR_HPP_
