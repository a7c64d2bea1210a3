#include "ucahar/labels.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace ucahar {

std::string_view to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::Activity: return "activity";
    case LabelKind::Context: return "context";
    case LabelKind::User: return "user";
  }
  return "activity";
}

LabelKind parse_label_kind(std::string_view text) {
  if (text == "activity") return LabelKind::Activity;
  if (text == "context") return LabelKind::Context;
  if (text == "user") return LabelKind::User;
  throw SchemaError("unknown label kind '" + std::string(text) + "'");
}

std::string_view to_string(PairingScope scope) {
  switch (scope) {
    case PairingScope::Activity: return "activity";
    case PairingScope::ActivityContext: return "activity+context";
    case PairingScope::All: return "all";
  }
  return "activity+context";
}

PairingScope parse_pairing_scope(std::string_view text) {
  if (text == "activity") return PairingScope::Activity;
  if (text == "activity+context") return PairingScope::ActivityContext;
  if (text == "all") return PairingScope::All;
  throw InvalidInput("unknown pairing scope '" + std::string(text) + "'");
}

LabelSchema LabelSchema::from_annotations(std::span<const Annotation> annotations) {
  std::set<std::string> activity, context, user;
  for (const auto& a : annotations) {
    switch (a.kind) {
      case LabelKind::Activity: activity.insert(a.name); break;
      case LabelKind::Context: context.insert(a.name); break;
      case LabelKind::User: user.insert(a.name); break;
    }
  }
  LabelSchema schema;
  schema.activity_names.assign(activity.begin(), activity.end());
  schema.context_names.assign(context.begin(), context.end());
  schema.user_ids.assign(user.begin(), user.end());
  return schema;
}

const std::vector<std::string>& LabelSchema::names(LabelKind kind) const {
  switch (kind) {
    case LabelKind::Activity: return activity_names;
    case LabelKind::Context: return context_names;
    case LabelKind::User: return user_ids;
  }
  return activity_names;
}

std::vector<std::string>& LabelSchema::names(LabelKind kind) {
  return const_cast<std::vector<std::string>&>(std::as_const(*this).names(kind));
}

Index LabelSchema::index_of(LabelKind kind, std::string_view name) const {
  const auto& list = names(kind);
  const auto it = std::find(list.begin(), list.end(), name);
  if (it == list.end()) {
    throw SchemaError("label '" + std::string(name) + "' is not a known " +
                      std::string(to_string(kind)));
  }
  return static_cast<Index>(it - list.begin());
}

const std::string& LabelSchema::name_of(LabelKind kind, Index index) const {
  const auto& list = names(kind);
  if (index < 0 || index >= static_cast<Index>(list.size())) {
    throw SchemaError("label index " + std::to_string(index) + " out of range for " +
                      std::string(to_string(kind)));
  }
  return list[static_cast<size_t>(index)];
}

void LabelSchema::validate() const {
  for (auto kind : {LabelKind::Activity, LabelKind::Context, LabelKind::User}) {
    const auto& list = names(kind);
    std::set<std::string> seen(list.begin(), list.end());
    if (seen.size() != list.size()) {
      throw SchemaError("duplicate " + std::string(to_string(kind)) + " names in schema");
    }
  }
  if (user_ids.empty()) throw SchemaError("schema has no users");
}

namespace {

bool is_binary(const Vector<double>& v) {
  return (v.array() == 0.0 || v.array() == 1.0).all();
}

}  // namespace

Index LabelSet::user_index() const {
  Index idx = 0;
  user.maxCoeff(&idx);
  return idx;
}

void LabelSet::validate() const {
  if (!is_binary(activities) || !is_binary(contexts) || !is_binary(user)) {
    throw DataIntegrityError("label entries must be 0 or 1");
  }
  if (user.sum() != 1.0) throw DataIntegrityError("user label must be one-hot");
}

std::vector<Annotation> active_annotations(std::span<const Annotation> annotations,
                                           double start_s, double end_s) {
  require(end_s > start_s, "window end must follow its start");
  const double duration = end_s - start_s;
  std::vector<Annotation> active;
  for (const auto& a : annotations) {
    const double overlap = std::min(a.end_s, end_s) - std::max(a.start_s, start_s);
    if (overlap > 0.5 * duration) active.push_back(a);
  }
  return active;
}

LabelSet encode_labels(std::span<const Annotation> active, const LabelSchema& schema) {
  LabelSet labels;
  labels.activities = Vector<double>::Zero(schema.size(LabelKind::Activity));
  labels.contexts = Vector<double>::Zero(schema.size(LabelKind::Context));
  labels.user = Vector<double>::Zero(schema.size(LabelKind::User));
  int users = 0;
  for (const auto& a : active) {
    const Index idx = schema.index_of(a.kind, a.name);
    switch (a.kind) {
      case LabelKind::Activity: labels.activities(idx) = 1.0; break;
      case LabelKind::Context: labels.contexts(idx) = 1.0; break;
      case LabelKind::User:
        if (labels.user(idx) == 0.0) ++users;
        labels.user(idx) = 1.0;
        break;
    }
  }
  if (users != 1) {
    throw DataIntegrityError("expected exactly one user annotation, found " +
                             std::to_string(users));
  }
  return labels;
}

std::vector<std::string> decode_labels(const LabelSet& labels, const LabelSchema& schema) {
  std::vector<std::string> out;
  auto collect = [&](const Vector<double>& bits, LabelKind kind) {
    for (Index i = 0; i < bits.size(); ++i) {
      if (bits(i) != 0.0) out.push_back(schema.name_of(kind, i));
    }
  };
  collect(labels.activities, LabelKind::Activity);
  collect(labels.contexts, LabelKind::Context);
  collect(labels.user, LabelKind::User);
  return out;
}

Vector<double> pairing_vector(const LabelSet& labels, PairingScope scope) {
  const Index na = labels.activities.size();
  const Index nc = scope == PairingScope::Activity ? 0 : labels.contexts.size();
  const Index nu = scope == PairingScope::All ? labels.user.size() : 0;
  Vector<double> out(na + nc + nu);
  out.head(na) = labels.activities;
  if (nc > 0) out.segment(na, nc) = labels.contexts;
  if (nu > 0) out.tail(nu) = labels.user;
  return out;
}

Index pairing_dim(const LabelSchema& schema, PairingScope scope) {
  Index dim = schema.size(LabelKind::Activity);
  if (scope != PairingScope::Activity) dim += schema.size(LabelKind::Context);
  if (scope == PairingScope::All) dim += schema.size(LabelKind::User);
  return dim;
}

}  // namespace ucahar
