#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedasm/assignment.hpp"
#include "fedasm/instance.hpp"

// Reference computations written directly from the model definitions. They
// only read InstanceSpec and never call the derived quantities of Instance,
// so they can serve as oracles for the library.
namespace fedasm::oracle {

/// Leaves reachable from `node`, by name.
std::set<std::string> leaves_below(const InstanceSpec& spec, const std::string& node);

/// Indices of classes whose leaf set meets leaves_below(node).
std::vector<std::size_t> classes_in(const InstanceSpec& spec, const std::string& node);

std::int64_t population(const InstanceSpec& spec, const std::string& node);

/// Sum over persons of N_c of 1 / (number of children of f containing them).
Rational weighted_population(const InstanceSpec& spec, const std::string& f, const std::string& c);

Rational quota(const InstanceSpec& spec, const std::string& f, const std::string& c);

/// floor(n q_{c,f}) for every edge of the spec, keyed by (parent, child).
std::map<std::pair<std::string, std::string>, std::int64_t> overlap_floors(const InstanceSpec& spec,
                                                                           std::int64_t n);

/// Ex post check written from the definitions: sizes, membership, no
/// duplicates, inheritance and overlap floors less `slack` on the edges it
/// names. Returns the number of violated constraints.
std::int64_t ex_post_violations(const Instance& instance, const AssemblyAssignment& a, std::int64_t n,
                                const std::map<std::pair<std::string, std::string>, std::int64_t>& slack = {});

/// Every canonical assignment with the ex post properties, enumerated by
/// brute force over all count tables.
std::vector<CanonicalAssignment> enumerate_canonical(const Instance& instance, std::int64_t n);

/// Half-width of a sigmas-wide binomial band around p for M trials.
double binomial_band(double p, std::int64_t trials, double sigmas = 4.0);

}  // namespace fedasm::oracle
