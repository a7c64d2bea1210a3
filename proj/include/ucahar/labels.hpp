#pragma once

#include "ucahar/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ucahar {

enum class LabelKind { Activity, Context, User };

std::string_view to_string(LabelKind kind);
LabelKind parse_label_kind(std::string_view text);

// A labelled time span from an annotation file.
struct Annotation {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string name;
  LabelKind kind = LabelKind::Activity;
};

// Ordered label vocabularies. Order defines bit positions for the whole run.
struct LabelSchema {
  std::vector<std::string> activity_names;
  std::vector<std::string> context_names;
  std::vector<std::string> user_ids;

  // Sorted unique names per kind.
  static LabelSchema from_annotations(std::span<const Annotation> annotations);

  const std::vector<std::string>& names(LabelKind kind) const;
  std::vector<std::string>& names(LabelKind kind);
  Index size(LabelKind kind) const { return static_cast<Index>(names(kind).size()); }

  // Throws SchemaError for unknown names.
  Index index_of(LabelKind kind, std::string_view name) const;
  const std::string& name_of(LabelKind kind, Index index) const;

  // Throws SchemaError on duplicate names or an empty user list.
  void validate() const;

  bool operator==(const LabelSchema&) const = default;
};

// Binary label structure for one instance. Entries are exactly 0 or 1.
struct LabelSet {
  Vector<double> activities;
  Vector<double> contexts;
  Vector<double> user;  // one-hot

  Index user_index() const;
  // Throws DataIntegrityError if entries are not binary or user is not one-hot.
  void validate() const;
};

// Which label groups enter the pair-construction dot product.
enum class PairingScope { Activity, ActivityContext, All };

std::string_view to_string(PairingScope scope);
PairingScope parse_pairing_scope(std::string_view text);

// Annotations covering strictly more than half of [start_s, end_s).
std::vector<Annotation> active_annotations(std::span<const Annotation> annotations,
                                           double start_s, double end_s);

// Multi-hot encoding following schema order. Requires exactly one user
// annotation; unknown names raise SchemaError.
LabelSet encode_labels(std::span<const Annotation> active, const LabelSchema& schema);

// Names of all active bits, in schema order (activities, contexts, user).
std::vector<std::string> decode_labels(const LabelSet& labels, const LabelSchema& schema);

Vector<double> pairing_vector(const LabelSet& labels,
                              PairingScope scope = PairingScope::ActivityContext);

Index pairing_dim(const LabelSchema& schema, PairingScope scope);

}  // namespace ucahar
