#include "ucahar/io.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace ucahar {

namespace {

constexpr std::string_view kDatasetMagic = "# ucahar-dataset v1";
constexpr std::string_view kCheckpointFormat = "ucahar-checkpoint";
constexpr int kCheckpointVersion = 1;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void check_name(const std::string& name) {
  if (name.find_first_of(",\n\r") != std::string::npos) {
    throw IoError("name '" + name + "' contains a delimiter");
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

Index parse_index(std::string_view text) {
  Index value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw IoError("invalid integer '" + std::string(text) + "'");
  return value;
}

std::string bits(const Vector<double>& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i) != 0.0 ? '1' : '0');
  return out;
}

std::string bits(const Mask& m) {
  std::string out;
  for (Index i = 0; i < m.size(); ++i) out.push_back(m(i) ? '1' : '0');
  return out;
}

Vector<double> parse_bits(std::string_view s, Index expected) {
  if (static_cast<Index>(s.size()) != expected) throw IoError("bit field has the wrong length");
  Vector<double> v(expected);
  for (Index i = 0; i < expected; ++i) {
    const char c = s[static_cast<size_t>(i)];
    if (c != '0' && c != '1') throw IoError("bit field contains '" + std::string(1, c) + "'");
    v(i) = c == '1' ? 1.0 : 0.0;
  }
  return v;
}

}  // namespace

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan" || text == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw IoError("invalid number '" + std::string(text) + "'");
  return value;
}

SensorStream read_stream_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");
  const auto header = split_fields(strip_cr(line));
  if (header.size() < 2 || header.front() != "timestamp") {
    throw IoError("'" + path.string() + "': header must start with 'timestamp'");
  }
  SensorStream stream;
  stream.sensor_id = path.stem().string();
  stream.channel_names.assign(header.begin() + 1, header.end());
  const Index channels = static_cast<Index>(stream.channel_names.size());

  std::vector<double> values;
  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<Index>(fields.size()) != channels + 1) {
      throw IoError("'" + path.string() + "' line " + std::to_string(row) + ": expected " +
                    std::to_string(channels + 1) + " fields");
    }
    stream.timestamps.push_back(parse_double(fields[0]));
    for (Index c = 0; c < channels; ++c) {
      const auto& f = fields[static_cast<size_t>(c + 1)];
      values.push_back(f.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(f));
    }
  }
  stream.values = Eigen::Map<Matrix<double>>(values.data(), channels, stream.samples());
  stream.validate();
  return stream;
}

void write_stream_csv(const std::filesystem::path& path, const SensorStream& stream) {
  stream.validate();
  auto out = open_out(path);
  out << "timestamp";
  for (const auto& name : stream.channel_names) {
    check_name(name);
    out << ',' << name;
  }
  out << '\n';
  for (Index i = 0; i < stream.samples(); ++i) {
    out << format_double(stream.timestamps[static_cast<size_t>(i)]);
    for (Index c = 0; c < stream.channels(); ++c) {
      out << ',';
      const double v = stream.values(c, i);
      if (!std::isnan(v)) out << format_double(v);
    }
    out << '\n';
  }
}

std::vector<Annotation> read_annotations_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "start_s,end_s,label_name,label_kind") {
    throw IoError("'" + path.string() + "': expected header start_s,end_s,label_name,label_kind");
  }
  std::vector<Annotation> out;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 4) throw IoError("'" + path.string() + "': annotation rows need 4 fields");
    Annotation a{parse_double(f[0]), parse_double(f[1]), f[2], parse_label_kind(f[3])};
    if (!(a.end_s > a.start_s)) throw DataIntegrityError("annotation '" + a.name + "' has end <= start");
    out.push_back(std::move(a));
  }
  return out;
}

void write_annotations_csv(const std::filesystem::path& path, std::span<const Annotation> annotations) {
  auto out = open_out(path);
  out << "start_s,end_s,label_name,label_kind\n";
  for (const auto& a : annotations) {
    check_name(a.name);
    out << format_double(a.start_s) << ',' << format_double(a.end_s) << ',' << a.name << ','
        << to_string(a.kind) << '\n';
  }
}

LabelSchema read_schema_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "label_kind,name,index") {
    throw IoError("'" + path.string() + "': expected header label_kind,name,index");
  }
  std::map<LabelKind, std::map<Index, std::string>> entries;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 3) throw IoError("'" + path.string() + "': schema rows need 3 fields");
    const auto kind = parse_label_kind(f[0]);
    const Index idx = parse_index(f[2]);
    if (!entries[kind].emplace(idx, f[1]).second) throw SchemaError("duplicate schema index");
  }
  LabelSchema schema;
  for (auto kind : {LabelKind::Activity, LabelKind::Context, LabelKind::User}) {
    auto& list = schema.names(kind);
    Index expected = 0;
    for (const auto& [idx, name] : entries[kind]) {
      if (idx != expected++) throw SchemaError("schema indices must be contiguous from 0");
      list.push_back(name);
    }
  }
  schema.validate();
  return schema;
}

void write_schema_csv(const std::filesystem::path& path, const LabelSchema& schema) {
  auto out = open_out(path);
  out << "label_kind,name,index\n";
  for (auto kind : {LabelKind::Activity, LabelKind::Context, LabelKind::User}) {
    const auto& list = schema.names(kind);
    for (size_t i = 0; i < list.size(); ++i) {
      check_name(list[i]);
      out << to_string(kind) << ',' << list[i] << ',' << i << '\n';
    }
  }
}

Normalizer read_normalizer_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "feature,mean,scale") {
    throw IoError("'" + path.string() + "': expected header feature,mean,scale");
  }
  std::vector<double> mean, scale;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 3) throw IoError("'" + path.string() + "': normalizer rows need 3 fields");
    mean.push_back(parse_double(f[1]));
    scale.push_back(parse_double(f[2]));
  }
  Normalizer n;
  n.mean = Eigen::Map<Vector<double>>(mean.data(), static_cast<Index>(mean.size()));
  n.scale = Eigen::Map<Vector<double>>(scale.data(), static_cast<Index>(scale.size()));
  return n;
}

void write_normalizer_csv(const std::filesystem::path& path, const Normalizer& normalizer,
                          const std::vector<std::string>& feature_names) {
  auto out = open_out(path);
  out << "feature,mean,scale\n";
  for (Index i = 0; i < normalizer.mean.size(); ++i) {
    const auto ui = static_cast<size_t>(i);
    out << (ui < feature_names.size() ? feature_names[ui] : "f" + std::to_string(i)) << ','
        << format_double(normalizer.mean(i)) << ',' << format_double(normalizer.scale(i)) << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const DatasetSplit& split,
                       const std::vector<std::string>& channel_names) {
  const Instance* first = !split.train.empty() ? &split.train.front()
                          : !split.val.empty() ? &split.val.front()
                          : !split.test.empty() ? &split.test.front()
                                                : nullptr;
  if (!first) throw IoError("refusing to write an empty dataset");
  const Index channels = first->window.channels();
  const Index snapshots = first->window.snapshots();
  const Index dim = first->features.size();

  auto out = open_out(path);
  out << kDatasetMagic << " channels=" << channels << " snapshots=" << snapshots
      << " features=" << dim << " activities=" << first->labels.activities.size()
      << " contexts=" << first->labels.contexts.size() << " users=" << first->labels.user.size()
      << " channel_names=";
  for (size_t c = 0; c < channel_names.size(); ++c) {
    check_name(channel_names[c]);
    if (channel_names[c].find(' ') != std::string::npos) throw IoError("channel names may not contain spaces");
    out << (c ? ";" : "") << channel_names[c];
  }
  out << '\n';
  out << "split,user_id,start_s,end_s,activities,contexts,user,channels_present,features_missing";
  for (Index i = 0; i < dim; ++i) out << ",f" << i;
  for (Index i = 0; i < channels * snapshots; ++i) out << ",x" << i;
  out << '\n';

  auto write_part = [&](const std::vector<Instance>& part, const char* name) {
    for (const auto& inst : part) {
      if (inst.window.channels() != channels || inst.window.snapshots() != snapshots ||
          inst.features.size() != dim) {
        throw IoError("instances disagree on shape");
      }
      check_name(inst.user_id);
      out << name << ',' << inst.user_id << ',' << format_double(inst.window.start_time) << ','
          << format_double(inst.window.end_time) << ',' << bits(inst.labels.activities) << ','
          << bits(inst.labels.contexts) << ',' << bits(inst.labels.user) << ','
          << bits(inst.window.channel_present) << ',' << bits(inst.features.missing);
      for (Index i = 0; i < dim; ++i) out << ',' << format_double(inst.features.values(i));
      for (Index c = 0; c < channels; ++c) {
        for (Index t = 0; t < snapshots; ++t) out << ',' << format_double(inst.window.data(c, t));
      }
      out << '\n';
    }
  };
  write_part(split.train, "train");
  write_part(split.val, "val");
  write_part(split.test, "test");
}

PreparedData read_dataset_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kDatasetMagic, 0) != 0) {
    throw IoError("'" + path.string() + "' is not a prepared dataset file");
  }
  std::map<std::string, std::string> meta;
  {
    std::istringstream ss(strip_cr(line).substr(kDatasetMagic.size()));
    std::string kv;
    while (ss >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw IoError("malformed dataset header");
      meta[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }
  auto dim_of = [&](const char* key) {
    if (!meta.contains(key)) throw IoError(std::string("dataset header lacks ") + key);
    return parse_index(meta[key]);
  };
  const Index channels = dim_of("channels");
  const Index snapshots = dim_of("snapshots");
  const Index dim = dim_of("features");
  const Index n_act = dim_of("activities");
  const Index n_ctx = dim_of("contexts");
  const Index n_usr = dim_of("users");

  PreparedData data;
  {
    std::string names = meta["channel_names"];
    size_t start = 0;
    while (start <= names.size() && !names.empty()) {
      const size_t sep = names.find(';', start);
      data.channel_names.push_back(names.substr(start, sep - start));
      if (sep == std::string::npos) break;
      start = sep + 1;
    }
  }
  data.layout = static_cast<Index>(data.channel_names.size()) == channels
                    ? ChannelLayout::from_names(data.channel_names)
                    : ChannelLayout::singletons(channels);

  std::getline(in, line);  // column header
  const size_t expected = 9 + static_cast<size_t>(dim + channels * snapshots);
  size_t row = 2;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != expected) {
      throw IoError("'" + path.string() + "' line " + std::to_string(row) + ": expected " +
                    std::to_string(expected) + " fields");
    }
    Instance inst;
    inst.user_id = f[1];
    inst.window.start_time = parse_double(f[2]);
    inst.window.end_time = parse_double(f[3]);
    inst.labels.activities = parse_bits(f[4], n_act);
    inst.labels.contexts = parse_bits(f[5], n_ctx);
    inst.labels.user = parse_bits(f[6], n_usr);
    inst.window.channel_present = parse_bits(f[7], channels).array() != 0.0;
    inst.features.missing = parse_bits(f[8], dim).array() != 0.0;
    inst.features.values.resize(dim);
    for (Index i = 0; i < dim; ++i) inst.features.values(i) = parse_double(f[9 + static_cast<size_t>(i)]);
    inst.window.data.resize(channels, snapshots);
    size_t k = 9 + static_cast<size_t>(dim);
    for (Index c = 0; c < channels; ++c) {
      for (Index t = 0; t < snapshots; ++t) inst.window.data(c, t) = parse_double(f[k++]);
    }
    inst.labels.validate();
    if (f[0] == "train") {
      data.split.train.push_back(std::move(inst));
    } else if (f[0] == "val") {
      data.split.val.push_back(std::move(inst));
    } else if (f[0] == "test") {
      data.split.test.push_back(std::move(inst));
    } else {
      throw IoError("unknown split '" + f[0] + "'");
    }
  }
  return data;
}

void write_checkpoint(const std::filesystem::path& path, const ModelParams<double>& params) {
  const auto& c = params.config();
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["model"] = {{"channels", c.channels},
                {"snapshots", c.snapshots},
                {"hidden_size", c.hidden_size},
                {"encoding_dim", c.encoding_dim},
                {"feature_dim", c.feature_dim},
                {"num_activities", c.num_activities},
                {"num_contexts", c.num_contexts},
                {"num_users", c.num_users},
                {"num_layers", ModelConfig::num_layers},
                {"use_sequence_encoder", c.use_sequence_encoder},
                {"seed", c.seed}};
  const auto& v = params.values();
  j["parameters"] = std::vector<double>(v.data(), v.data() + v.size());
  auto out = open_out(path);
  out << j.dump() << '\n';
}

ModelParams<double> read_checkpoint(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat) throw IoError("'" + path.string() + "' is not a checkpoint");
  if (j.value("version", 0) != kCheckpointVersion) throw IoError("unsupported checkpoint version");
  const auto& m = j.at("model");
  ModelConfig c;
  c.channels = m.at("channels").get<Index>();
  c.snapshots = m.at("snapshots").get<Index>();
  c.hidden_size = m.at("hidden_size").get<Index>();
  c.encoding_dim = m.at("encoding_dim").get<Index>();
  c.feature_dim = m.at("feature_dim").get<Index>();
  c.num_activities = m.at("num_activities").get<Index>();
  c.num_contexts = m.at("num_contexts").get<Index>();
  c.num_users = m.at("num_users").get<Index>();
  c.use_sequence_encoder = m.at("use_sequence_encoder").get<bool>();
  c.seed = m.at("seed").get<std::uint64_t>();
  ModelParams<double> params(c);
  const auto values = j.at("parameters").get<std::vector<double>>();
  if (static_cast<Index>(values.size()) != params.size()) {
    throw IoError("checkpoint holds " + std::to_string(values.size()) + " parameters, model needs " +
                  std::to_string(params.size()));
  }
  params.values() = Eigen::Map<const Vector<double>>(values.data(), params.size());
  return params;
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace ucahar
