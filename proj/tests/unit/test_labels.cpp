#include "doctest.h"

#include "ucahar/labels.hpp"

using namespace ucahar;

namespace {

std::vector<Annotation> sample_annotations() {
  return {{0, 10, "walking", LabelKind::Activity}, {0, 10, "talking", LabelKind::Activity},
          {0, 10, "in_pocket", LabelKind::Context}, {0, 10, "u7", LabelKind::User},
          {0, 10, "sitting", LabelKind::Activity},  {0, 10, "in_bag", LabelKind::Context},
          {0, 10, "u2", LabelKind::User}};
}

}  // namespace

TEST_CASE("schema lists names sorted and unique per kind") {
  auto ann = sample_annotations();
  ann.push_back({5, 6, "walking", LabelKind::Activity});
  const auto schema = LabelSchema::from_annotations(ann);
  CHECK(schema.activity_names == std::vector<std::string>{"sitting", "talking", "walking"});
  CHECK(schema.context_names == std::vector<std::string>{"in_bag", "in_pocket"});
  CHECK(schema.user_ids == std::vector<std::string>{"u2", "u7"});
  CHECK(schema.index_of(LabelKind::Context, "in_pocket") == 1);
  CHECK(schema.name_of(LabelKind::User, 1) == "u7");
  CHECK_THROWS_AS(schema.index_of(LabelKind::Activity, "flying"), SchemaError);
}

TEST_CASE("encode then decode round-trips the active names") {
  const auto schema = LabelSchema::from_annotations(sample_annotations());
  const std::vector<Annotation> active = {{0, 1, "walking", LabelKind::Activity},
                                          {0, 1, "talking", LabelKind::Activity},
                                          {0, 1, "in_pocket", LabelKind::Context},
                                          {0, 1, "u7", LabelKind::User}};
  const auto labels = encode_labels(active, schema);
  CHECK(labels.activities == Vector<double>((Vector<double>(3) << 0, 1, 1).finished()));
  CHECK(labels.user_index() == 1);
  CHECK(decode_labels(labels, schema) ==
        std::vector<std::string>{"talking", "walking", "in_pocket", "u7"});
}

TEST_CASE("an instance needs exactly one user") {
  const auto schema = LabelSchema::from_annotations(sample_annotations());
  const std::vector<Annotation> none = {{0, 1, "walking", LabelKind::Activity}};
  const std::vector<Annotation> two = {{0, 1, "u2", LabelKind::User}, {0, 1, "u7", LabelKind::User}};
  CHECK_THROWS_AS(encode_labels(none, schema), DataIntegrityError);
  CHECK_THROWS_AS(encode_labels(two, schema), DataIntegrityError);
}

TEST_CASE("unknown names raise schema errors") {
  const auto schema = LabelSchema::from_annotations(sample_annotations());
  const std::vector<Annotation> odd = {{0, 1, "u2", LabelKind::User}, {0, 1, "flying", LabelKind::Activity}};
  CHECK_THROWS_AS(encode_labels(odd, schema), SchemaError);
}

TEST_CASE("annotations are active only when covering more than half the window") {
  const std::vector<Annotation> ann = {{0.0, 1.5, "half", LabelKind::Activity},
                                       {0.0, 1.6, "more", LabelKind::Activity},
                                       {2.9, 10.0, "tail", LabelKind::Activity}};
  const auto active = active_annotations(ann, 0.0, 3.0);
  REQUIRE(active.size() == 1);
  CHECK(active[0].name == "more");
}

TEST_CASE("label set validation") {
  LabelSet ok{Vector<double>::Zero(2), Vector<double>::Ones(1), Vector<double>::Unit(3, 2)};
  CHECK_NOTHROW(ok.validate());
  LabelSet bad = ok;
  bad.activities(0) = 0.5;
  CHECK_THROWS_AS(bad.validate(), DataIntegrityError);
  bad = ok;
  bad.user(0) = 1.0;
  CHECK_THROWS_AS(bad.validate(), DataIntegrityError);
}

TEST_CASE("pairing scope selects the label groups") {
  LabelSet l{Vector<double>::Ones(2), Vector<double>::Zero(3), Vector<double>::Unit(4, 1)};
  CHECK(pairing_vector(l, PairingScope::Activity).size() == 2);
  CHECK(pairing_vector(l).size() == 5);
  CHECK(pairing_vector(l, PairingScope::All).size() == 9);
  CHECK(pairing_vector(l, PairingScope::All)(6) == 1.0);
  CHECK(parse_pairing_scope("activity+context") == PairingScope::ActivityContext);
  CHECK(to_string(PairingScope::All) == "all");
  CHECK_THROWS(parse_pairing_scope("users"));
}
