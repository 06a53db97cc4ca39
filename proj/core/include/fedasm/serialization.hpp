#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "fedasm/assignment.hpp"
#include "fedasm/instance.hpp"

namespace fedasm {

/// Malformed input. `location` is a byte offset ("byte 17") for syntax
/// errors and a JSON pointer ("/classes/2/size") for schema errors.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string location, const std::string& message);
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

/// Schema-level parse only; no semantic validation.
InstanceSpec parse_instance_spec(std::string_view text);

/// Parses and validates. Throws ParseError or InvalidInstance.
Instance parse_instance(std::string_view text);

std::string serialize_instance(const InstanceSpec& spec);
std::string serialize_instance(const Instance& instance);

AssemblyAssignment parse_assignment(std::string_view text, const Instance& instance);
std::string serialize_assignment(const Instance& instance, const AssemblyAssignment& a);

/// Weights are written as shortest round-trip decimal strings.
RandomizedAssignment parse_randomized(std::string_view text, const Instance& instance);
std::string serialize_randomized(const Instance& instance, const RandomizedAssignment& r);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace fedasm
