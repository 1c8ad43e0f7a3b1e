#pragma once

#include <stdexcept>
#include <string>

namespace oim {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct CycleDetected : Error {
    explicit CycleDetected(const std::string& w = "cover digraph contains a cycle") : Error(w) {}
};
struct UnknownElement : Error {
    explicit UnknownElement(const std::string& w = "element not declared in poset") : Error(w) {}
};
struct NotADownSet : Error {
    explicit NotADownSet(const std::string& w = "set is not downward closed") : Error(w) {}
};
struct NotAnOrderedStem : Error {
    explicit NotAnOrderedStem(const std::string& w = "sequence is not an ordered stem") : Error(w) {}
};
struct ResourceLimit : Error {
    explicit ResourceLimit(const std::string& w = "state budget exceeded") : Error(w) {}
};
struct CapExceeded : Error {
    explicit CapExceeded(const std::string& w = "extension count exceeds cap") : Error(w) {}
};
struct NotMaximal : Error {
    explicit NotMaximal(const std::string& w = "element is not maximal") : Error(w) {}
};
struct FlowViolation : Error {
    explicit FlowViolation(const std::string& w = "flow identity fails") : Error(w) {}
};
struct HasMaximalElement : Error {
    explicit HasMaximalElement(const std::string& w = "forest has a maximal element") : Error(w) {}
};
struct TailUnbounded : Error {
    explicit TailUnbounded(const std::string& w = "no usable tail bound supplied") : Error(w) {}
};
struct NotAYoungDiagram : Error {
    explicit NotAYoungDiagram(const std::string& w = "shape is not a Young diagram") : Error(w) {}
};
struct SupportMismatch : Error {
    explicit SupportMismatch(const std::string& w = "measures live on different supports") : Error(w) {}
};
struct ZeroProbabilityStem : Error {
    explicit ZeroProbabilityStem(const std::string& w = "conditioning stem has probability zero") : Error(w) {}
};
struct InconclusiveAtHorizon : Error {
    explicit InconclusiveAtHorizon(const std::string& w = "appearance probability not resolved at horizon") : Error(w) {}
};
struct EmptySample : Error {
    explicit EmptySample(const std::string& w = "point sample is empty") : Error(w) {}
};
struct NotExhaustive : Error {
    explicit NotExhaustive(const std::string& w = "exhaustion rule stalls") : Error(w) {}
};
struct NotAStem : Error {
    explicit NotAStem(const std::string& w = "not a stem of the support") : Error(w) {}
};
struct UsageError : Error {
    explicit UsageError(const std::string& w = "bad command or parameter") : Error(w) {}
};

} // namespace oim
