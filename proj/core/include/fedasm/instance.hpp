#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedasm/rational.hpp"

namespace fedasm {

enum class NodeId : std::uint32_t {};
enum class ClassId : std::uint32_t {};

constexpr std::size_t idx(NodeId v) { return static_cast<std::size_t>(v); }
constexpr std::size_t idx(ClassId c) { return static_cast<std::size_t>(c); }
constexpr NodeId node_id(std::size_t i) { return static_cast<NodeId>(i); }
constexpr ClassId class_id(std::size_t i) { return static_cast<ClassId>(i); }

/// Unvalidated description of an instance, exactly as it appears on disk.
struct InstanceSpec {
  struct ClassSpec {
    std::vector<std::string> leaves;
    std::int64_t size = 0;

    friend bool operator==(const ClassSpec&, const ClassSpec&) = default;
  };
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // (parent, child)
  std::vector<ClassSpec> classes;

  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

enum class IssueKind {
  EmptyNodeList,
  DuplicateNode,
  UnknownEdgeEndpoint,
  SelfLoop,
  DuplicateEdge,
  Cycle,
  EmptyClassList,
  EmptyLeafSet,
  UnknownClassLeaf,
  ClassLeafNotLeaf,
  DuplicateClass,
  NonPositiveClassSize,
  LeafWithoutClass,
  UnrepresentedClass,
  PopulationBelowAssemblySize,
};

const char* to_string(IssueKind kind);

struct ValidationIssue {
  IssueKind kind;
  bool is_error;
  std::string subject;  // node id, edge "a->b" or "class[i]"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const;
  bool has(IssueKind kind) const;
  std::string summary() const;
};

/// Checks acyclicity, class well-formedness, class reachability and, when an
/// assembly size is supplied, flags nodes whose population is below it.
/// Total: never throws on malformed input.
ValidationReport validate(const InstanceSpec& spec,
                          std::optional<std::int64_t> assembly_size = std::nullopt);

class InvalidInstance : public std::runtime_error {
 public:
  explicit InvalidInstance(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

struct EquivalenceClass {
  std::vector<NodeId> leaves;  // sorted
  std::int64_t size = 0;
};

struct Edge {
  NodeId parent;
  NodeId child;
};

/// A validated, immutable instance: the assembly DAG, the equivalence
/// classes and every derived population quantity. Persons are never
/// materialized; a person is (class, index within class).
class Instance {
 public:
  /// Throws InvalidInstance if `validate(spec)` reports an error.
  static Instance build(InstanceSpec spec);

  const InstanceSpec& spec() const { return spec_; }

  std::size_t num_nodes() const { return names_.size(); }
  std::size_t num_classes() const { return classes_.size(); }

  const std::string& name(NodeId v) const { return names_[idx(v)]; }
  std::optional<NodeId> find(const std::string& name) const;
  NodeId at(const std::string& name) const;

  std::span<const NodeId> children(NodeId v) const { return children_[idx(v)]; }
  std::span<const NodeId> parents(NodeId v) const { return parents_[idx(v)]; }
  bool is_leaf(NodeId v) const { return children_[idx(v)].empty(); }
  bool is_child(NodeId parent, NodeId child) const;

  /// Parents before children.
  std::span<const NodeId> topological_order() const { return topo_; }
  std::span<const Edge> edges() const { return edges_; }
  std::vector<NodeId> leaves() const;
  std::vector<NodeId> federations() const;

  const EquivalenceClass& equivalence_class(ClassId c) const { return classes_[idx(c)]; }
  std::int64_t class_size(ClassId c) const { return classes_[idx(c)].size; }

  /// Classes C^L contained in N_v, ascending.
  std::span<const ClassId> classes_of(NodeId v) const { return classes_of_[idx(v)]; }
  bool contains(NodeId v, ClassId c) const { return contains_[idx(v) * classes_.size() + idx(c)]; }

  /// Leaves reachable from v (v itself for a leaf), ascending.
  std::span<const NodeId> descendant_leaves(NodeId v) const { return descendant_leaves_[idx(v)]; }

  /// |N_v|.
  std::int64_t population(NodeId v) const { return population_[idx(v)]; }
  std::int64_t total_population() const { return total_population_; }

 private:
  Instance() = default;

  InstanceSpec spec_;
  std::vector<std::string> names_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<NodeId> topo_;
  std::vector<Edge> edges_;
  std::vector<EquivalenceClass> classes_;
  std::vector<std::vector<ClassId>> classes_of_;
  std::vector<char> contains_;
  std::vector<std::vector<NodeId>> descendant_leaves_;
  std::vector<std::int64_t> population_;
  std::int64_t total_population_ = 0;
};

ValidationReport validate(const Instance& instance,
                          std::optional<std::int64_t> assembly_size = std::nullopt);

/// m(L, f): number of children of f whose population contains class c.
std::int64_t multiplicity(const Instance& instance, NodeId federation, ClassId c);

/// w_{c,f} = sum over classes in N_child of |C^L| / m(L, f). Exact.
/// Throws std::invalid_argument when child is not a child of federation.
Rational weighted_population(const Instance& instance, NodeId federation, NodeId child);

/// q_{c,f} = w_{c,f} / |N_f|.
Rational quota(const Instance& instance, NodeId federation, NodeId child);

/// N_f recomputed as the union of classes whose leaf set meets the
/// descendant leaves of v. Independent of the cached populations.
std::int64_t population_via_classes(const Instance& instance, NodeId v);

// ---------------------------------------------------------------------------
// Classification

enum class InstanceKind { Laminar, SemiLaminar, General };

const char* to_string(InstanceKind kind);

/// Region tree R and topic set T of a semi-laminar instance.
struct SemiLaminarStructure {
  std::size_t num_regions() const { return region_parent.size(); }
  std::size_t num_topics = 0;
  std::vector<std::optional<std::size_t>> region_parent;   // region 0 is the root
  std::vector<std::vector<std::size_t>> region_children;
  std::vector<NodeId> star;                                // (r, *)
  std::vector<std::vector<NodeId>> topic_node;             // [r][t] -> (r, t)
  std::vector<std::size_t> class_region;                   // leaf region of each class
  std::vector<std::vector<std::size_t>> class_topics;      // sorted topic set of each class

  bool is_leaf_region(std::size_t r) const { return region_children[r].empty(); }
  /// Regions with every child before its parent.
  std::vector<std::size_t> regions_bottom_up() const;
};

struct Classification {
  InstanceKind kind = InstanceKind::General;
  std::optional<SemiLaminarStructure> semilaminar;
};

/// Laminar: every node has at most one parent and every class has a single
/// leaf. SemiLaminar: exact structural match of the region x topic product.
/// Everything else is General.
Classification classify(const Instance& instance);

struct SemiLaminarLayout {
  struct ClassSpec {
    std::size_t region = 0;
    std::vector<std::size_t> topics;
    std::int64_t size = 0;
  };
  std::vector<std::optional<std::size_t>> region_parent;  // region 0 must be the root
  std::size_t num_topics = 0;
  std::vector<ClassSpec> classes;
};

/// Builds the region x (topics + aggregator) graph. Node names are
/// "r<region>:t<topic>" and "r<region>:*".
Instance build_semilaminar(const SemiLaminarLayout& layout);

// ---------------------------------------------------------------------------
// Generators

struct GeneratorOptions {
  double mean_class_size = 100.0;
  std::int64_t min_class_size = 1;
};

/// Random instance in the style of the column-generation experiments: one
/// leaf per equivalence class with exponentially distributed sizes, then
/// federations whose children are a random set of previously created nodes.
Instance generate_instance(std::size_t num_classes, std::size_t num_federations,
                           std::uint64_t seed, const GeneratorOptions& options = {});

/// One federation over 2n leaves; 2n classes of size k signed to one leaf
/// each and one class of size (2n-1)k signed to every leaf. No algorithm that
/// fills parents from independently drawn child assemblies can be fair here,
/// yet a correlated randomized assignment exists.
Instance iterative_impossibility_fixture(std::int64_t n, std::int64_t k);

}  // namespace fedasm
