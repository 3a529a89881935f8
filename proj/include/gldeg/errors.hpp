#pragma once

#include <stdexcept>
#include <string>

namespace gldeg {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TopologyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ChartError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gldeg
