// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spmdperf/errors.hpp"
#include "spmdperf/model.hpp"

namespace spmdperf {

// ---------------------------------------------------------------------------
// Number formatting/parsing (shortest round-trip form, locale independent)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(const std::string& token, const std::string& loc) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || token.empty()) {
    throw AnalysisError(ErrorCode::ParseError,
                        loc + ": expected a number, got '" + token + "'");
  }
  return v;
}

inline long long parse_int(const std::string& token, const std::string& loc) {
  long long v = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || token.empty()) {
    throw AnalysisError(ErrorCode::ParseError,
                        loc + ": expected an integer, got '" + token + "'");
  }
  return v;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------
// Shared dataset assembly with validation
// ---------------------------------------------------------------------------

class ProfileBuilder {
 public:
  void set_program(const std::string& name, const std::string& loc) {
    if (have_program_) {
      throw AnalysisError(ErrorCode::ParseError, loc + ": duplicate program line");
    }
    if (name.empty()) {
      throw AnalysisError(ErrorCode::ParseError, loc + ": empty program name");
    }
    program_ = name;
    have_program_ = true;
  }

  void set_processes(long long count, const std::string& loc) {
    if (have_processes_) {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": duplicate processes line");
    }
    if (count < 1 || count > 1000000) {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": process count must be in [1, 1000000]");
    }
    processes_ = static_cast<int>(count);
    have_processes_ = true;
    roles_.assign(static_cast<std::size_t>(processes_), Role::Worker);
  }

  void set_role(long long rank, Role role, const std::string& loc) {
    require_processes(loc);
    check_rank(rank, loc);
    if (!role_seen_.insert(static_cast<int>(rank)).second) {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": duplicate role for rank " + std::to_string(rank));
    }
    roles_[static_cast<std::size_t>(rank)] = role;
  }

  void add_region(long long id, std::optional<long long> parent,
                  const std::string& label, const std::string& loc) {
    if (id < 0) {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": region id must be non-negative");
    }
    if (label.empty()) {
      throw AnalysisError(ErrorCode::ParseError, loc + ": empty region label");
    }
    const int rid = static_cast<int>(id);
    if (tree_.has(rid)) {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": duplicate region id " + std::to_string(rid));
    }
    RegionNode node;
    node.id = rid;
    node.label = label;
    if (!parent.has_value()) {
      if (!tree_.nodes.empty()) {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": the root region must be unique and come first");
      }
      node.depth = 0;
      tree_.root = rid;
    } else {
      const int pid = static_cast<int>(*parent);
      RegionNode* p = find_mutable(pid);
      if (p == nullptr) {
        throw AnalysisError(ErrorCode::UnresolvedRegion,
                            loc + ": parent region " + std::to_string(pid) +
                                " not declared before region " + std::to_string(rid));
      }
      node.parent = pid;
      node.depth = p->depth + 1;
      p->children.push_back(rid);
    }
    tree_.nodes.push_back(node);
  }

  void add_sample(long long rank, long long region, const MetricSample& s,
                  const std::string& loc) {
    require_processes(loc);
    check_rank(rank, loc);
    const int rid = static_cast<int>(region);
    if (!tree_.has(rid)) {
      throw AnalysisError(ErrorCode::UnresolvedRegion,
                          loc + ": sample names undeclared region " +
                              std::to_string(region));
    }
    const double fields[] = {s.wall_time, s.cpu_time,  s.cycles,
                             s.instructions, s.l1_miss, s.l1_access,
                             s.l2_miss, s.l2_access, s.mpi_time,
                             s.mpi_bytes, s.disk_bytes};
    for (double f : fields) {
      if (f < 0.0) {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": negative measurement value");
      }
    }
    if (s.l1_miss > s.l1_access || s.l2_miss > s.l2_access) {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": cache misses exceed cache accesses");
    }
    auto key = std::make_pair(static_cast<int>(rank), rid);
    if (!sample_seen_.insert(key).second) {
      throw AnalysisError(ErrorCode::DuplicateSample,
                          loc + ": duplicate sample for rank " +
                              std::to_string(rank) + ", region " +
                              std::to_string(region));
    }
    pending_.emplace_back(key, s);
  }

  ProfileDataset finish(const std::string& loc) {
    if (!have_program_) {
      throw AnalysisError(ErrorCode::ParseError, loc + ": missing program line");
    }
    require_processes(loc);
    if (tree_.nodes.empty() || tree_.root < 0) {
      throw AnalysisError(ErrorCode::ParseError, loc + ": no root region declared");
    }
    ProfileDataset ds;
    ds.program = program_;
    ds.tree = std::move(tree_);
    ds.process_count = processes_;
    ds.roles = std::move(roles_);
    ds.region_order = ds.tree.region_ids();
    // Missing samples materialize as non-executed zero samples.
    ds.samples.assign(static_cast<std::size_t>(processes_) * ds.region_order.size(),
                      MetricSample{});
    for (const auto& [key, s] : pending_) {
      ds.sample_mutable(key.first, key.second) = s;
    }
    return ds;
  }

 private:
  void require_processes(const std::string& loc) const {
    if (!have_processes_) {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": processes must be declared first");
    }
  }

  void check_rank(long long rank, const std::string& loc) const {
    if (rank < 0 || rank >= processes_) {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": rank " + std::to_string(rank) +
                              " outside [0, " + std::to_string(processes_) + ")");
    }
  }

  RegionNode* find_mutable(int id) {
    for (auto& n : tree_.nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  std::string program_;
  bool have_program_ = false;
  int processes_ = 0;
  bool have_processes_ = false;
  std::vector<Role> roles_;
  std::set<int> role_seen_;
  RegionTree tree_;
  std::set<std::pair<int, int>> sample_seen_;
  std::vector<std::pair<std::pair<int, int>, MetricSample>> pending_;
};

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

inline constexpr const char* kProfileMagic = "spmdperf-profile";
inline constexpr int kSchemaVersion = 1;

inline ProfileDataset load_profile_text(std::istream& in) {
  ProfileBuilder b;
  std::string line;
  int line_no = 0;
  bool seen_magic = false;
  bool seen_schema = false;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  };
  while (next()) {
    const std::string loc = "line " + std::to_string(line_no);
    if (!seen_magic) {
      if (line != kProfileMagic) {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": missing '" + std::string(kProfileMagic) +
                                "' header");
      }
      seen_magic = true;
      continue;
    }
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (!seen_schema) {
      if (word != "schema_version") {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": expected schema_version after the header");
      }
      std::string ver;
      ls >> ver;
      long long v = parse_int(ver, loc);
      if (v != kSchemaVersion) {
        throw AnalysisError(ErrorCode::SchemaVersionUnsupported,
                            loc + ": schema_version " + ver + " unsupported");
      }
      seen_schema = true;
      continue;
    }
    if (word == "program") {
      std::string rest;
      std::getline(ls, rest);
      b.set_program(trim(rest), loc);
    } else if (word == "processes") {
      std::string tok;
      ls >> tok;
      b.set_processes(parse_int(tok, loc), loc);
    } else if (word == "role") {
      std::string rank_tok, role_tok;
      ls >> rank_tok >> role_tok;
      Role role;
      if (role_tok == "worker") {
        role = Role::Worker;
      } else if (role_tok == "master") {
        role = Role::Master;
      } else {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": role must be worker or master");
      }
      b.set_role(parse_int(rank_tok, loc), role, loc);
    } else if (word == "region") {
      std::string id_tok, parent_tok;
      ls >> id_tok >> parent_tok;
      if (parent_tok.empty()) {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": region needs <id> <parent|-> <label>");
      }
      std::string rest;
      std::getline(ls, rest);
      std::optional<long long> parent;
      if (parent_tok != "-") parent = parse_int(parent_tok, loc);
      b.add_region(parse_int(id_tok, loc), parent, trim(rest), loc);
    } else if (word == "sample") {
      std::vector<std::string> toks;
      std::string tok;
      while (ls >> tok) toks.push_back(tok);
      if (toks.size() != 14) {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": sample needs rank, region, 11 values and an"
                                  " executed flag");
      }
      MetricSample s;
      s.wall_time = parse_double(toks[2], loc);
      s.cpu_time = parse_double(toks[3], loc);
      s.cycles = parse_double(toks[4], loc);
      s.instructions = parse_double(toks[5], loc);
      s.l1_miss = parse_double(toks[6], loc);
      s.l1_access = parse_double(toks[7], loc);
      s.l2_miss = parse_double(toks[8], loc);
      s.l2_access = parse_double(toks[9], loc);
      s.mpi_time = parse_double(toks[10], loc);
      s.mpi_bytes = parse_double(toks[11], loc);
      s.disk_bytes = parse_double(toks[12], loc);
      if (toks[13] == "0") {
        s.executed = false;
      } else if (toks[13] == "1") {
        s.executed = true;
      } else {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": executed flag must be 0 or 1");
      }
      b.add_sample(parse_int(toks[0], loc), parse_int(toks[1], loc), s, loc);
    } else {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": unknown directive '" + word + "'");
    }
  }
  if (!seen_magic) {
    throw AnalysisError(ErrorCode::ParseError, "empty profile input");
  }
  return b.finish("end of input");
}

// ---------------------------------------------------------------------------
// XML converter (read-only; saving always emits the text format)
// ---------------------------------------------------------------------------

struct XmlElement {
  std::string name;
  std::map<std::string, std::string> attrs;
};

inline std::string xml_unescape(const std::string& s, const std::string& loc) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    std::size_t end = s.find(';', i);
    if (end == std::string::npos) {
      throw AnalysisError(ErrorCode::ParseError, loc + ": unterminated entity");
    }
    std::string ent = s.substr(i + 1, end - i - 1);
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos") out.push_back('\'');
    else
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": unknown entity &" + ent + ";");
    i = end;
  }
  return out;
}

// Pulls the next opening element (start or self-closing tag), skipping
// prologs, comments, closing tags and text.
inline std::optional<XmlElement> next_xml_element(const std::string& text,
                                                  std::size_t& pos) {
  while (true) {
    std::size_t lt = text.find('<', pos);
    if (lt == std::string::npos) return std::nullopt;
    if (text.compare(lt, 4, "<!--") == 0) {
      std::size_t end = text.find("-->", lt);
      if (end == std::string::npos) {
        throw AnalysisError(ErrorCode::ParseError, "unterminated XML comment");
      }
      pos = end + 3;
      continue;
    }
    if (text.compare(lt, 2, "<?") == 0) {
      std::size_t end = text.find("?>", lt);
      if (end == std::string::npos) {
        throw AnalysisError(ErrorCode::ParseError, "unterminated XML prolog");
      }
      pos = end + 2;
      continue;
    }
    if (text.compare(lt, 2, "</") == 0) {
      std::size_t end = text.find('>', lt);
      if (end == std::string::npos) {
        throw AnalysisError(ErrorCode::ParseError, "unterminated closing tag");
      }
      pos = end + 1;
      continue;
    }
    std::size_t gt = text.find('>', lt);
    if (gt == std::string::npos) {
      throw AnalysisError(ErrorCode::ParseError, "unterminated XML tag");
    }
    std::string body = text.substr(lt + 1, gt - lt - 1);
    if (!body.empty() && body.back() == '/') body.pop_back();
    XmlElement el;
    std::size_t i = 0;
    while (i < body.size() && !isspace(static_cast<unsigned char>(body[i]))) ++i;
    el.name = body.substr(0, i);
    if (el.name.empty()) {
      throw AnalysisError(ErrorCode::ParseError, "XML tag without a name");
    }
    const std::string loc = "element <" + el.name + ">";
    while (i < body.size()) {
      while (i < body.size() && isspace(static_cast<unsigned char>(body[i]))) ++i;
      if (i >= body.size()) break;
      std::size_t eq = body.find('=', i);
      if (eq == std::string::npos) {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": attribute without '='");
      }
      std::string key = trim(body.substr(i, eq - i));
      std::size_t q1 = body.find('"', eq);
      if (q1 == std::string::npos) {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": attribute value must be quoted");
      }
      std::size_t q2 = body.find('"', q1 + 1);
      if (q2 == std::string::npos) {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": unterminated attribute value");
      }
      el.attrs[key] = xml_unescape(body.substr(q1 + 1, q2 - q1 - 1), loc);
      i = q2 + 1;
    }
    pos = gt + 1;
    return el;
  }
}

inline const std::string& xml_attr(const XmlElement& el, const std::string& key) {
  auto it = el.attrs.find(key);
  if (it == el.attrs.end()) {
    throw AnalysisError(ErrorCode::ParseError, "element <" + el.name +
                                                   "> is missing attribute '" +
                                                   key + "'");
  }
  return it->second;
}

inline ProfileDataset load_profile_xml(const std::string& text) {
  ProfileBuilder b;
  std::size_t pos = 0;
  std::optional<XmlElement> rootel = next_xml_element(text, pos);
  if (!rootel.has_value() || rootel->name != "profile") {
    throw AnalysisError(ErrorCode::ParseError,
                        "XML profile must start with a <profile> element");
  }
  {
    const std::string loc = "element <profile>";
    long long v = parse_int(xml_attr(*rootel, "schema_version"), loc);
    if (v != kSchemaVersion) {
      throw AnalysisError(ErrorCode::SchemaVersionUnsupported,
                          loc + ": schema_version " + std::to_string(v) +
                              " unsupported");
    }
    b.set_program(xml_attr(*rootel, "program"), loc);
    b.set_processes(parse_int(xml_attr(*rootel, "processes"), loc), loc);
  }
  int index = 0;
  while (auto el = next_xml_element(text, pos)) {
    ++index;
    const std::string loc = "element <" + el->name + "> #" + std::to_string(index);
    if (el->name == "region") {
      const std::string& parent_tok = xml_attr(*el, "parent");
      std::optional<long long> parent;
      if (parent_tok != "-") parent = parse_int(parent_tok, loc);
      b.add_region(parse_int(xml_attr(*el, "id"), loc), parent,
                   xml_attr(*el, "label"), loc);
    } else if (el->name == "process") {
      const std::string& role_tok = xml_attr(*el, "role");
      Role role;
      if (role_tok == "worker") {
        role = Role::Worker;
      } else if (role_tok == "master") {
        role = Role::Master;
      } else {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": role must be worker or master");
      }
      b.set_role(parse_int(xml_attr(*el, "rank"), loc), role, loc);
    } else if (el->name == "sample") {
      MetricSample s;
      s.wall_time = parse_double(xml_attr(*el, "wall_time"), loc);
      s.cpu_time = parse_double(xml_attr(*el, "cpu_time"), loc);
      s.cycles = parse_double(xml_attr(*el, "cycles"), loc);
      s.instructions = parse_double(xml_attr(*el, "instructions"), loc);
      s.l1_miss = parse_double(xml_attr(*el, "l1_miss"), loc);
      s.l1_access = parse_double(xml_attr(*el, "l1_access"), loc);
      s.l2_miss = parse_double(xml_attr(*el, "l2_miss"), loc);
      s.l2_access = parse_double(xml_attr(*el, "l2_access"), loc);
      s.mpi_time = parse_double(xml_attr(*el, "mpi_time"), loc);
      s.mpi_bytes = parse_double(xml_attr(*el, "mpi_bytes"), loc);
      s.disk_bytes = parse_double(xml_attr(*el, "disk_bytes"), loc);
      const std::string& ex = xml_attr(*el, "executed");
      if (ex == "0") {
        s.executed = false;
      } else if (ex == "1") {
        s.executed = true;
      } else {
        throw AnalysisError(ErrorCode::ParseError,
                            loc + ": executed flag must be 0 or 1");
      }
      b.add_sample(parse_int(xml_attr(*el, "rank"), loc),
                   parse_int(xml_attr(*el, "region"), loc), s, loc);
    } else {
      throw AnalysisError(ErrorCode::ParseError,
                          loc + ": unknown element <" + el->name + ">");
    }
  }
  return b.finish("end of XML input");
}

}  // namespace detail

// Loads either format: XML when the first non-blank byte is '<', otherwise
// the native text format.
inline ProfileDataset load_profile(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t i = 0;
  while (i < text.size() && isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i < text.size() && text[i] == '<') {
    return detail::load_profile_xml(text);
  }
  std::istringstream ts(text);
  return detail::load_profile_text(ts);
}

inline ProfileDataset load_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw AnalysisError(ErrorCode::ParseError, "cannot open " + path);
  }
  return load_profile(in);
}

// Canonical text serialization: header, masters, regions in pre-order
// (sibling order preserved), then all samples rank-major / region ascending.
inline std::string save_profile(const ProfileDataset& ds) {
  std::ostringstream out;
  out << detail::kProfileMagic << "\n";
  out << "schema_version " << detail::kSchemaVersion << "\n";
  out << "program " << ds.program << "\n";
  out << "processes " << ds.process_count << "\n";
  for (int r = 0; r < ds.process_count; ++r) {
    if (ds.roles[static_cast<std::size_t>(r)] == Role::Master) {
      out << "role " << r << " master\n";
    }
  }
  std::vector<int> order;
  std::vector<int> stack{ds.tree.root};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const RegionNode& n = ds.tree.at(id);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
      stack.push_back(*it);
    }
  }
  for (int id : order) {
    const RegionNode& n = ds.tree.at(id);
    out << "region " << id << " ";
    if (n.parent.has_value()) {
      out << *n.parent;
    } else {
      out << "-";
    }
    out << " " << n.label << "\n";
  }
  for (int rank = 0; rank < ds.process_count; ++rank) {
    for (int id : ds.region_order) {
      const MetricSample& s = ds.sample(rank, id);
      out << "sample " << rank << " " << id;
      const double fields[] = {s.wall_time, s.cpu_time, s.cycles,
                               s.instructions, s.l1_miss, s.l1_access,
                               s.l2_miss, s.l2_access, s.mpi_time,
                               s.mpi_bytes, s.disk_bytes};
      for (double f : fields) out << " " << detail::format_double(f);
      out << " " << (s.executed ? 1 : 0) << "\n";
    }
  }
  return out.str();
}

inline void save_profile_file(const ProfileDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw AnalysisError(ErrorCode::ParseError, "cannot open " + path +
                                                   " for writing");
  }
  out << save_profile(ds);
}

// ---------------------------------------------------------------------------
// Synthetic workload generator with planted bottlenecks
// ---------------------------------------------------------------------------

enum class ScenarioKind { Balanced, ImbalancedRegion, HeavyRegion, CompositeImbalance };

enum class ShapeKind {
  FlatBalanced14,
  StCoarse14,
  StMaster14,
  StFine18,
  Npar12,
  Mpibzip16,
  Flat8,
  Generic7Disk,
  Generic7Instr,
  Generic7L2,
  Generic7L1,
  Generic7Net,
  HotspotBase,
  HotspotTuned,
};

inline const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Balanced: return "balanced";
    case ScenarioKind::ImbalancedRegion: return "imbalanced-region";
    case ScenarioKind::HeavyRegion: return "heavy-region";
    case ScenarioKind::CompositeImbalance: return "composite-imbalance";
  }
  return "unknown";
}

inline const char* shape_kind_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::FlatBalanced14: return "flat-balanced-14";
    case ShapeKind::StCoarse14: return "nested-coarse-14";
    case ShapeKind::StMaster14: return "nested-master-14";
    case ShapeKind::StFine18: return "nested-fine-18";
    case ShapeKind::Npar12: return "particle-12";
    case ShapeKind::Mpibzip16: return "compress-16";
    case ShapeKind::Flat8: return "flat-8";
    case ShapeKind::Generic7Disk: return "pipeline-7-disk";
    case ShapeKind::Generic7Instr: return "pipeline-7-instr";
    case ShapeKind::Generic7L2: return "pipeline-7-l2";
    case ShapeKind::Generic7L1: return "pipeline-7-l1";
    case ShapeKind::Generic7Net: return "pipeline-7-net";
    case ShapeKind::HotspotBase: return "hotspot-4-base";
    case ShapeKind::HotspotTuned: return "hotspot-4-tuned";
  }
  return "unknown";
}

// A planted scenario: a base workload shape plus one deliberate defect.
struct PlantSpec {
  std::string name;  // catalog name, may be empty for ad-hoc specs
  ShapeKind shape = ShapeKind::Flat8;
  ScenarioKind kind = ScenarioKind::Balanced;
  int ranks = 8;
  unsigned seed = 0;
  int region = -1;                      // imbalance / heavy target
  std::vector<int> affected_ranks;      // imbalance / composite victims
  double intensity = 0.0;               // perturbation multiplier
  MetricKind heavy_metric = MetricKind::DiskBytes;
  std::pair<int, int> composite_pair{-1, -1};
  std::set<int> excluded_ranks;         // advertised analysis exclusions
};

// What an analysis of the generated profile is expected to report.
struct GroundTruth {
  bool dissimilarity_expected = false;
  std::vector<int> dissimilarity_ccr;
  std::vector<int> dissimilarity_cccr;
  std::vector<std::string> dissimilarity_causes;
  std::optional<int> composite_width;
  bool disparity_expected = false;
  std::vector<int> disparity_ccr;
  std::vector<int> disparity_cccr;
  std::vector<std::string> disparity_causes;
  std::vector<int> excluded_ranks;
};

struct GeneratedProfile {
  PlantSpec spec;
  ProfileDataset dataset;
  GroundTruth truth;
};

namespace detail {

struct ShapeRegion {
  int id;
  int parent;  // -1 for the root
  MetricSample self;
};

struct ShapeDef {
  const char* program;
  double total_wall;
  std::vector<ShapeRegion> regions;  // parent-first, siblings ascending
};

// Self (exclusive) contribution of one region; cpu defaults to wall and
// mpi_time to zero.  Rate pairs are given as (access, miss).
inline MetricSample self_sample(double wall, double cycles, double instructions,
                                double l1_access, double l1_miss,
                                double l2_access, double l2_miss,
                                double network, double disk) {
  MetricSample s;
  s.wall_time = wall;
  s.cpu_time = wall;
  s.cycles = cycles;
  s.instructions = instructions;
  s.l1_access = l1_access;
  s.l1_miss = l1_miss;
  s.l2_access = l2_access;
  s.l2_miss = l2_miss;
  s.mpi_time = 0.0;
  s.mpi_bytes = network;
  s.disk_bytes = disk;
  s.executed = true;
  return s;
}

inline constexpr double kP15 = 32768.0;
inline constexpr double kP16 = 65536.0;
inline constexpr double kP17 = 131072.0;
inline constexpr double kP18 = 262144.0;
inline constexpr double kP19 = 524288.0;
inline constexpr double kP20 = 1048576.0;
inline constexpr double kP21 = 2097152.0;
inline constexpr double kP22 = 4194304.0;
inline constexpr double kP24 = 16777216.0;
inline constexpr double kP28 = 268435456.0;
inline constexpr double kP30 = 1073741824.0;
inline constexpr double kP34 = 17179869184.0;
inline constexpr double kP35 = 34359738368.0;

inline ShapeDef shape_flat_balanced14() {
  ShapeDef d{"even-phases", 128.0, {}};
  d.regions.push_back({0, -1, MetricSample{}});
  for (int id = 1; id <= 14; ++id) {
    d.regions.push_back(
        {id, 0, self_sample(4, 4e9, 4e9, kP24, kP20, kP24, kP20, kP18, kP18)});
  }
  return d;
}

inline ShapeDef shape_flat8() {
  ShapeDef d{"flat-kernels", 256.0, {}};
  d.regions.push_back({0, -1, MetricSample{}});
  for (int id = 1; id <= 8; ++id) {
    d.regions.push_back(
        {id, 0, self_sample(16, 16e9, 16e9, kP24, kP20, kP24, kP20, kP16, kP16)});
  }
  return d;
}

inline ShapeDef shape_st_coarse14(const char* program) {
  ShapeDef d{program, 512.0, {}};
  auto& r = d.regions;
  r.push_back({0, -1, MetricSample{}});
  r.push_back({1, 0, self_sample(4, 4e9, 4e9, kP24, kP19, kP24, kP19, kP18, kP20)});
  r.push_back({2, 0, self_sample(1, 16e9, 4e9, kP24, kP22, kP24, kP19, kP20, kP20)});
  r.push_back({3, 0, self_sample(1, 1e9, 1e9, kP24, kP19, kP24, kP19, kP16, kP16)});
  r.push_back({4, 0, self_sample(2, 2e9, 2e9, kP24, kP19, kP24, kP19, kP18, kP18)});
  r.push_back({5, 0, self_sample(1, 24e9, 24e9, kP24, kP22, kP24, kP22, kP16, kP16)});
  r.push_back({6, 0, self_sample(0.25, 96e9, 24e9, kP24, kP22, kP24, kP20, kP18, kP20)});
  r.push_back({7, 0, self_sample(0.25, 8e9, 2e9, kP24, kP20, kP24, kP20, kP16, kP18)});
  r.push_back({8, 0, self_sample(24, 60e9, 24e9, kP24, kP20, kP24, kP20, kP18, kP35)});
  r.push_back({9, 0, self_sample(16, 0.5e9, 2e9, kP24, kP22, kP24, kP20, kP16, kP18)});
  r.push_back({10, 0, self_sample(16, 1e9, 4e9, kP24, kP22, kP24, kP21, kP20, kP20)});
  r.push_back({13, 0, self_sample(1, 1e9, 1e9, kP24, kP20, kP24, kP21, kP16, kP16)});
  r.push_back({14, 0, self_sample(2, 3e9, 3e9, kP20, 393216, kP20, 458752, kP17, kP17)});
  r.push_back({11, 14, self_sample(48, 24e9, 24e9, kP30, kP28, kP24, kP22, kP16, kP16)});
  r.push_back({12, 14, self_sample(2, 1e9, 1e9, kP20, kP17, kP20, kP16, kP16, kP16)});
  return d;
}

inline ShapeDef shape_st_fine18() {
  ShapeDef d{"grid-solver-fine", 512.0, {}};
  auto& r = d.regions;
  r.push_back({0, -1, MetricSample{}});
  r.push_back({1, 0, self_sample(4, 4e9, 4e9, kP24, kP19, kP24, kP19, kP18, kP20)});
  r.push_back({2, 0, self_sample(1, 16e9, 4e9, kP24, kP22, kP24, kP19, kP20, kP20)});
  r.push_back({3, 0, self_sample(1, 1e9, 1e9, kP24, kP19, kP24, kP19, kP16, kP16)});
  r.push_back({4, 0, self_sample(2, 2e9, 2e9, kP24, kP19, kP24, kP19, kP18, kP18)});
  r.push_back({5, 0, self_sample(1, 24e9, 24e9, kP24, kP22, kP24, kP22, kP16, kP16)});
  r.push_back({6, 0, self_sample(0.25, 96e9, 24e9, kP24, kP22, kP24, kP20, kP18, kP20)});
  r.push_back({7, 0, self_sample(0.25, 8e9, 2e9, kP24, kP20, kP24, kP20, kP16, kP18)});
  r.push_back({8, 0, self_sample(2, 19e9, 7e9, kP24, 1572864, kP24, 0, kP17,
                                 kP35 - kP34 - kP16)});
  r.push_back({19, 8, self_sample(20, 40e9, 16e9, kP24, kP20, kP24, kP20, kP16, kP34)});
  r.push_back({20, 8, self_sample(2, 1e9, 1e9, kP24, kP19, kP24, kP21, kP16, kP16)});
  r.push_back({9, 0, self_sample(16, 0.5e9, 2e9, kP24, kP22, kP24, kP20, kP16, kP18)});
  r.push_back({10, 0, self_sample(16, 1e9, 4e9, kP24, kP22, kP24, kP21, kP20, kP20)});
  r.push_back({13, 0, self_sample(1, 1e9, 1e9, kP24, kP20, kP24, kP21, kP16, kP16)});
  r.push_back({14, 0, self_sample(2, 3e9, 3e9, kP20, 393216, kP20, 458752, 720896, 720896)});
  r.push_back({11, 14, self_sample(6, 3e9, 3e9, kP20, 458752, kP20, 458752, kP17, kP17)});
  r.push_back({21, 11, self_sample(40, 20e9, 20e9, kP30, kP28, kP24, kP22, kP16, kP16)});
  r.push_back({22, 11, self_sample(2, 1e9, 1e9, kP20, kP16, kP20, kP16, kP16, kP16)});
  r.push_back({12, 14, self_sample(2, 1e9, 1e9, kP20, kP17, kP20, kP16, kP16, kP16)});
  return d;
}

inline ShapeDef shape_npar12() {
  ShapeDef d{"particle-sim", 128.0, {}};
  auto& r = d.regions;
  r.push_back({0, -1, MetricSample{}});
  r.push_back({1, 0, self_sample(1, 1e9, 1e9, kP24, kP19, kP24, kP19, kP16, kP16)});
  r.push_back({2, 0, self_sample(1, 1e9, 1e9, kP24, kP19, kP24, kP19, kP16, kP16)});
  r.push_back({3, 0, self_sample(16, 78e9, 26e9, kP24, kP20, kP24, kP20, kP16, kP18)});
  r.push_back({4, 0, self_sample(1, 1e9, 1e9, kP24, kP19, kP24, kP20, kP16, kP16)});
  r.push_back({5, 0, self_sample(1, 24e9, 24e9, kP24, kP20, kP24, kP19, kP16, kP18)});
  r.push_back({6, 0, self_sample(2, 1e9, 1e9, kP24, kP21, kP24, kP20, kP16, kP16)});
  r.push_back({7, 0, self_sample(2, 2e9, 2e9, kP24, kP19, kP24, kP21, kP18, kP16)});
  r.push_back({8, 0, self_sample(2, 2e9, 2e9, kP24, kP20, kP24, kP19, kP18, kP18)});
  r.push_back({9, 0, self_sample(4, 2e9, 2e9, kP24, kP21, kP24, kP20, kP18, kP20)});
  r.push_back({10, 0, self_sample(4, 4e9, 4e9, kP24, kP19, kP24, kP21, kP20, kP20)});
  r.push_back({11, 0, self_sample(4, 4e9, 4e9, kP24, kP20, kP24, kP19, kP20, kP20)});
  {
    MetricSample s = self_sample(16, 270e9, 60e9, kP24, kP19, kP24, kP20, kP20, kP18);
    s.cpu_time = 14;
    s.mpi_time = 2;
    r.push_back({12, 0, s});
  }
  return d;
}

inline ShapeDef shape_mpibzip16() {
  ShapeDef d{"block-compress", 128.0, {}};
  auto& r = d.regions;
  r.push_back({0, -1, MetricSample{}});
  // Three-step spreads for the quiet metrics (miss value for access 2^24).
  auto l1m = [](int id) {
    if (id == 1 || id == 2 || id == 3 || id == 6 || id == 7 || id == 13) return kP19;
    if (id == 4 || id == 8 || id == 9 || id == 14 || id == 15) return kP20;
    return kP21;  // 5, 10, 11, 12, 16
  };
  auto l2m = [](int id) {
    if (id == 1 || id == 4 || id == 7 || id == 10 || id == 13 || id == 16) return kP19;
    if (id == 2 || id == 5 || id == 8 || id == 11 || id == 14 || id == 6) return kP20;
    return kP21;  // 3, 9, 12, 15
  };
  auto net = [](int id) {
    if (id <= 5 || id == 8 || id == 9) return kP16;
    if (id >= 10 && id <= 14) return kP18;
    return kP20;  // 15, 16, 6, 7
  };
  auto dsk = [](int id) {
    if (id <= 6) return kP16;
    if (id <= 11) return kP18;
    return kP20;
  };
  auto wall_of = [](int id) {
    if (id <= 5) return 1.0;
    if (id >= 8 && id <= 12) return 2.0;
    return 4.0;  // 13..16
  };
  for (int id = 1; id <= 16; ++id) {
    if (id == 6) {
      r.push_back({6, 0, self_sample(18, 2048e9, 512e9, kP24, l1m(6), kP24, l2m(6),
                                     net(6), dsk(6))});
    } else if (id == 7) {
      MetricSample s = self_sample(16, 2e9, 1e9, kP24, l1m(7), kP24, l2m(7),
                                   net(7), dsk(7));
      s.cpu_time = 12;
      s.mpi_time = 4;
      r.push_back({7, 0, s});
    } else {
      const double w = wall_of(id);
      r.push_back({id, 0, self_sample(w, w * 1e9, w * 1e9, kP24, l1m(id), kP24,
                                      l2m(id), net(id), dsk(id))});
    }
  }
  return d;
}

// Shared frame for the five single-defect pipelines: 0 -> {1,2,3}, 1 -> {4,5},
// 2 -> {6}.  Each variant redistributes time/counters so exactly one metric
// carries the planted defect.
inline ShapeDef shape_generic7_disk(bool heavy_disk_column) {
  ShapeDef d{"mixed-pipeline", 128.0, {}};
  auto& r = d.regions;
  r.push_back({0, -1, MetricSample{}});
  r.push_back({1, 0, self_sample(2, 2e9, 2e9, kP20, 327680, kP20, 98304, kP17, kP17)});
  r.push_back({4, 1, self_sample(1, 1e9, 1e9, kP20, kP15, kP20, kP15, kP16, kP16)});
  r.push_back({5, 1, self_sample(1, 1e9, 1e9, kP20, kP15, kP20, kP16, kP16, kP16)});
  r.push_back({2, 0, self_sample(1, 1e9, 1e9, kP20, 98304, kP20, 229376,
                                 kP18 - kP16, kP20 - kP16)});
  r.push_back({6, 2, self_sample(1, 1e9, 1e9, kP20, kP15, kP20, kP15, kP16, kP16)});
  r.push_back({3, 0, self_sample(12, 16e9, 4e9, kP20, kP15, kP20, kP15, kP16,
                                 heavy_disk_column ? kP20 : kP16)});
  return d;
}

inline ShapeDef shape_generic7_l2(bool target_l1) {
  ShapeDef d{"mixed-pipeline", 128.0, {}};
  auto& r = d.regions;
  // Quiet (all-equal) design for the non-target rate; graded design for the
  // target rate with region 5 as the plant site.
  const double quiet_m = kP15;
  auto rates = [&](double target_miss) {
    // returns (l1_access, l1_miss, l2_access, l2_miss)
    struct Q { double a1, m1, a2, m2; } q{};
    if (target_l1) {
      q = {kP20, target_miss, kP20, quiet_m};
    } else {
      q = {kP20, quiet_m, kP20, target_miss};
    }
    return q;
  };
  r.push_back({0, -1, MetricSample{}});
  {
    auto q = rates(kP16);
    r.push_back({1, 0, self_sample(2, 3e9, 1e9, q.a1, q.m1, q.a2, q.m2, kP16, kP16)});
  }
  {
    auto q = rates(kP16);
    r.push_back({4, 1, self_sample(2, 1e9, 1e9, q.a1, q.m1, q.a2, q.m2, kP16, kP16)});
  }
  {
    auto q = rates(kP15);
    r.push_back({5, 1, self_sample(12, 8e9, 2e9, q.a1, q.m1, q.a2, q.m2, kP16, kP16)});
  }
  {
    auto q = rates(98304);
    r.push_back({2, 0, self_sample(1, 1e9, 1e9, q.a1, q.m1, q.a2, q.m2, kP16, kP16)});
  }
  {
    auto q = rates(kP15);
    r.push_back({6, 2, self_sample(1, 1e9, 1e9, q.a1, q.m1, q.a2, q.m2, kP16, kP16)});
  }
  {
    auto q = rates(kP15);
    r.push_back({3, 0, self_sample(4, 4e9, 4e9, q.a1, q.m1, q.a2, q.m2, kP16, kP16)});
  }
  return d;
}

inline ShapeDef shape_generic7_net() {
  ShapeDef d{"mixed-pipeline", 128.0, {}};
  auto& r = d.regions;
  r.push_back({0, -1, MetricSample{}});
  r.push_back({1, 0, self_sample(2, 1e9, 1e9, kP20, kP15, kP20, kP15, kP17, kP16)});
  r.push_back({4, 1, self_sample(1, 1e9, 1e9, kP20, kP15, kP20, kP15, kP16, kP16)});
  r.push_back({5, 1, self_sample(1, 1e9, 1e9, kP20, kP15, kP20, kP15, kP16, kP16)});
  r.push_back({2, 0, self_sample(2, 2e9, 1e9, kP20, kP15, kP20, kP15, kP16, kP16)});
  r.push_back({6, 2, self_sample(6, 16e9, 2e9, kP20, kP15, kP20, kP15, kP18, kP16)});
  r.push_back({3, 0, self_sample(2, 2e9, 2e9, kP20, kP15, kP20, kP15, kP17, kP16)});
  return d;
}

inline ShapeDef shape_hotspot(bool tuned) {
  ShapeDef d{tuned ? "hotspot-study-tuned" : "hotspot-study", 128.0, {}};
  auto& r = d.regions;
  r.push_back({0, -1, MetricSample{}});
  r.push_back({1, 0, self_sample(4, 4e9, 4e9, kP20, kP15, kP20, kP16, kP16, kP16)});
  r.push_back({2, 0, self_sample(2, 2e9, 2e9, kP20, kP15, kP20, kP17, kP16, kP16)});
  r.push_back({3, 0, self_sample(1, 1e9, 1e9, kP20, kP15, kP20, kP15, kP16, kP16)});
  if (tuned) {
    r.push_back({11, 0, self_sample(32, 4.16e9, 4e9, kP20, kP15, kP20, kP15,
                                    kP16, kP16)});
  } else {
    r.push_back({11, 0, self_sample(64, 3.28e9, 4e9, kP20, kP15, kP20, kP15,
                                    kP16, kP16)});
  }
  return d;
}

inline ShapeDef shape_def(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::FlatBalanced14: return shape_flat_balanced14();
    case ShapeKind::StCoarse14: return shape_st_coarse14("grid-solver");
    case ShapeKind::StMaster14: return shape_st_coarse14("grid-solver-master");
    case ShapeKind::StFine18: return shape_st_fine18();
    case ShapeKind::Npar12: return shape_npar12();
    case ShapeKind::Mpibzip16: return shape_mpibzip16();
    case ShapeKind::Flat8: return shape_flat8();
    case ShapeKind::Generic7Disk: return shape_generic7_disk(true);
    case ShapeKind::Generic7Instr: return shape_generic7_disk(false);
    case ShapeKind::Generic7L2: return shape_generic7_l2(false);
    case ShapeKind::Generic7L1: return shape_generic7_l2(true);
    case ShapeKind::Generic7Net: return shape_generic7_net();
    case ShapeKind::HotspotBase: return shape_hotspot(false);
    case ShapeKind::HotspotTuned: return shape_hotspot(true);
  }
  throw AnalysisError(ErrorCode::InvalidSpec, "unknown shape");
}

using SampleField = double MetricSample::*;

inline bool is_time_field(SampleField f) {
  return f == &MetricSample::wall_time || f == &MetricSample::cpu_time;
}

// Multiplies one region's inclusive fields and pushes the growth up the
// ancestry.  Count deltas reach the root; time deltas stop below it, keeping
// the whole-program wall time a fixed budget.
inline void plant_scale(std::map<int, MetricSample>& incl, const RegionTree& tree,
                        int region, double factor,
                        const std::vector<SampleField>& fields) {
  for (SampleField f : fields) {
    const double before = incl.at(region).*f;
    const double delta = before * (factor - 1.0);
    incl.at(region).*f = before * factor;
    std::optional<int> p = tree.at(region).parent;
    while (p.has_value()) {
      if (!(is_time_field(f) && *p == tree.root)) {
        incl.at(*p).*f += delta;
      }
      p = tree.at(*p).parent;
    }
  }
}

inline const std::vector<SampleField>& compute_fields() {
  static const std::vector<SampleField> v = {
      &MetricSample::wall_time, &MetricSample::cpu_time, &MetricSample::cycles,
      &MetricSample::instructions};
  return v;
}

inline std::vector<SampleField> heavy_fields(MetricKind metric) {
  switch (metric) {
    case MetricKind::DiskBytes:
      return {&MetricSample::disk_bytes};
    case MetricKind::NetworkBytes:
      return {&MetricSample::mpi_bytes};
    case MetricKind::L1MissRate:
      return {&MetricSample::l1_miss};
    case MetricKind::L2MissRate:
      return {&MetricSample::l2_miss};
    case MetricKind::InstructionsRetired:
      // Both scale so the pipeline efficiency (and with it the region's
      // relative-cost profile) is preserved; only the volume grows.
      return {&MetricSample::instructions, &MetricSample::cycles};
    default:
      throw AnalysisError(ErrorCode::InvalidSpec,
                          std::string("heavy-region cannot target metric ") +
                              metric_kind_name(metric));
  }
}

struct HeavyRule {
  ShapeKind shape;
  int region;
  MetricKind metric;
  double lo;
  double hi;
};

inline const std::vector<HeavyRule>& heavy_rules() {
  static const std::vector<HeavyRule> rules = {
      {ShapeKind::Npar12, 12, MetricKind::NetworkBytes, 2.0, 1048576.0},
      {ShapeKind::Mpibzip16, 7, MetricKind::NetworkBytes, 2.0, 1048576.0},
      {ShapeKind::Generic7Disk, 3, MetricKind::DiskBytes, 2.0, 1048576.0},
      {ShapeKind::Generic7Instr, 3, MetricKind::InstructionsRetired, 1.125, 4096.0},
      {ShapeKind::Generic7L2, 5, MetricKind::L2MissRate, 4.0625, 32.0},
      {ShapeKind::Generic7L1, 5, MetricKind::L1MissRate, 4.0625, 32.0},
      {ShapeKind::Generic7Net, 6, MetricKind::NetworkBytes, 2.0, 1048576.0},
      {ShapeKind::HotspotBase, 11, MetricKind::L2MissRate, 4.0625, 32.0},
      {ShapeKind::HotspotTuned, 11, MetricKind::InstructionsRetired, 1.125, 4096.0},
  };
  return rules;
}

inline void fail_spec(const std::string& message) {
  throw AnalysisError(ErrorCode::InvalidSpec, message);
}

// Graded per-victim multipliers: the j-th affected rank (ascending) slows by
// max(2, intensity - q + 1 + j) so victims separate from each other as well
// as from the healthy ranks.
inline std::vector<double> graded_multipliers(double intensity, std::size_t q) {
  std::vector<double> m;
  for (std::size_t j = 0; j < q; ++j) {
    m.push_back(std::max(2.0, intensity - static_cast<double>(q) + 1.0 +
                                  static_cast<double>(j)));
  }
  return m;
}

inline double mean_multiplier(const std::vector<double>& m, int ranks) {
  double sum = static_cast<double>(ranks) - static_cast<double>(m.size());
  for (double x : m) sum += x;
  return sum / static_cast<double>(ranks);
}

inline void validate_spec(const PlantSpec& spec) {
  if (spec.ranks < 1) fail_spec("ranks must be at least 1");
  for (int r : spec.excluded_ranks) {
    if (r < 0 || r >= spec.ranks) fail_spec("excluded rank out of range");
  }
  if (static_cast<int>(spec.excluded_ranks.size()) >= spec.ranks) {
    fail_spec("excluding every rank leaves nothing to analyse");
  }
  const bool shaped = spec.shape != ShapeKind::FlatBalanced14;
  if (shaped && spec.ranks != 8) {
    fail_spec(std::string(shape_kind_name(spec.shape)) +
              " is calibrated for exactly 8 ranks");
  }

  auto check_affected = [&] {
    if (spec.affected_ranks.empty()) fail_spec("affected_ranks must be non-empty");
    std::set<int> uniq(spec.affected_ranks.begin(), spec.affected_ranks.end());
    if (uniq.size() != spec.affected_ranks.size()) {
      fail_spec("affected_ranks must not repeat");
    }
    for (int r : uniq) {
      if (r < 0 || r >= spec.ranks) fail_spec("affected rank out of range");
    }
    if (static_cast<int>(uniq.size()) >= spec.ranks) {
      fail_spec("affected_ranks must be a proper subset of the ranks");
    }
  };

  switch (spec.kind) {
    case ScenarioKind::Balanced: {
      if (spec.shape == ShapeKind::FlatBalanced14) break;
      if (spec.shape == ShapeKind::StMaster14) {
        if (spec.excluded_ranks != std::set<int>{0}) {
          fail_spec("nested-master-14 expects excluded_ranks = {0}: the skewed "
                    "coordinator rank must be excluded for the calibrated truth");
        }
        break;
      }
      fail_spec("balanced runs use flat-balanced-14 or nested-master-14");
      break;
    }
    case ScenarioKind::ImbalancedRegion: {
      if (!spec.excluded_ranks.empty()) {
        fail_spec("imbalanced-region scenarios analyse all ranks");
      }
      check_affected();
      if (spec.intensity < 2.0 || spec.intensity > 8.0 ||
          spec.intensity != static_cast<double>(static_cast<int>(spec.intensity))) {
        fail_spec("imbalanced-region intensity must be an integer in [2, 8]");
      }
      if (spec.shape == ShapeKind::Flat8) {
        if (spec.region < 1 || spec.region > 8) {
          fail_spec("flat-8 imbalance targets a region in 1..8");
        }
      } else if (spec.shape == ShapeKind::StCoarse14) {
        if (spec.region != 11) {
          fail_spec("nested-coarse-14 is calibrated for imbalance at region 11");
        }
      } else if (spec.shape == ShapeKind::StFine18) {
        if (spec.region != 21) {
          fail_spec("nested-fine-18 is calibrated for imbalance at region 21");
        }
        std::vector<double> m =
            graded_multipliers(spec.intensity, spec.affected_ranks.size());
        if (mean_multiplier(m, spec.ranks) < 1.5) {
          fail_spec("nested-fine-18 needs a mean slowdown of at least 1.5x; "
                    "raise the intensity or widen affected_ranks");
        }
      } else {
        fail_spec("imbalanced-region runs use flat-8, nested-coarse-14 or "
                  "nested-fine-18");
      }
      break;
    }
    case ScenarioKind::HeavyRegion: {
      if (!spec.excluded_ranks.empty()) {
        fail_spec("heavy-region scenarios analyse all ranks");
      }
      if (!spec.affected_ranks.empty()) {
        fail_spec("heavy-region applies to every rank; affected_ranks must be "
                  "empty");
      }
      for (const HeavyRule& rule : heavy_rules()) {
        if (rule.shape != spec.shape) continue;
        if (spec.region != rule.region || spec.heavy_metric != rule.metric) {
          fail_spec(std::string(shape_kind_name(spec.shape)) +
                    " is calibrated for a heavy " +
                    metric_kind_name(rule.metric) + " plant at region " +
                    std::to_string(rule.region));
        }
        if (spec.intensity < rule.lo || spec.intensity > rule.hi) {
          fail_spec(std::string(shape_kind_name(spec.shape)) +
                    " heavy intensity must lie in [" + format_double(rule.lo) +
                    ", " + format_double(rule.hi) + "]");
        }
        return;
      }
      fail_spec(std::string(shape_kind_name(spec.shape)) +
                " has no calibrated heavy-region plant");
      break;
    }
    case ScenarioKind::CompositeImbalance: {
      if (!spec.excluded_ranks.empty()) {
        fail_spec("composite-imbalance scenarios analyse all ranks");
      }
      check_affected();
      if (spec.shape != ShapeKind::Flat8) {
        fail_spec("composite-imbalance runs use flat-8");
      }
      if (spec.intensity < 1.5 || spec.intensity > 5.0) {
        fail_spec("composite-imbalance intensity must lie in [1.5, 5]");
      }
      const int a = spec.composite_pair.first;
      const int b = spec.composite_pair.second;
      if (a < 1 || a > 8 || b != a + 1 || (a - 1) % 2 != 0) {
        fail_spec("composite_pair must name adjacent siblings aligned to an "
                  "even tile boundary, e.g. (1,2), (3,4), (5,6) or (7,8)");
      }
      break;
    }
  }
}

inline GroundTruth ground_truth(const PlantSpec& spec) {
  GroundTruth t;
  t.excluded_ranks.assign(spec.excluded_ranks.begin(), spec.excluded_ranks.end());
  auto disp = [&](std::vector<int> ccr, std::vector<int> cccr,
                  std::vector<std::string> causes) {
    t.disparity_expected = true;
    t.disparity_ccr = std::move(ccr);
    t.disparity_cccr = std::move(cccr);
    t.disparity_causes = std::move(causes);
  };
  auto diss = [&](std::vector<int> ccr, std::vector<int> cccr,
                  std::vector<std::string> causes) {
    t.dissimilarity_expected = true;
    t.dissimilarity_ccr = std::move(ccr);
    t.dissimilarity_cccr = std::move(cccr);
    t.dissimilarity_causes = std::move(causes);
  };
  switch (spec.kind) {
    case ScenarioKind::Balanced:
      if (spec.shape == ShapeKind::StMaster14) {
        disp({8, 11, 14}, {8, 11}, {"a2", "a3"});
      }
      break;
    case ScenarioKind::ImbalancedRegion:
      if (spec.shape == ShapeKind::Flat8) {
        diss({spec.region}, {spec.region}, {"a5"});
      } else if (spec.shape == ShapeKind::StCoarse14) {
        diss({11, 14}, {11}, {"a5"});
        disp({8, 11, 14}, {8, 11}, {"a2", "a3"});
      } else if (spec.shape == ShapeKind::StFine18) {
        diss({11, 14, 21}, {21}, {"a5"});
        disp({8, 11, 14, 19, 21}, {19, 21}, {"a2", "a3"});
      }
      break;
    case ScenarioKind::HeavyRegion:
      switch (spec.shape) {
        case ShapeKind::Npar12: disp({3, 12}, {3, 12}, {"a4", "a5"}); break;
        case ShapeKind::Mpibzip16: disp({6, 7}, {6, 7}, {"a4", "a5"}); break;
        case ShapeKind::Generic7Disk: disp({3}, {3}, {"a3"}); break;
        case ShapeKind::Generic7Instr: disp({3}, {3}, {"a5"}); break;
        case ShapeKind::Generic7L2: disp({1, 5}, {5}, {"a2"}); break;
        case ShapeKind::Generic7L1: disp({1, 5}, {5}, {"a1"}); break;
        case ShapeKind::Generic7Net: disp({2, 6}, {6}, {"a4"}); break;
        case ShapeKind::HotspotBase: disp({11}, {11}, {"a2"}); break;
        case ShapeKind::HotspotTuned: disp({11}, {11}, {"a5"}); break;
        default: break;
      }
      break;
    case ScenarioKind::CompositeImbalance: {
      std::vector<int> pair{spec.composite_pair.first, spec.composite_pair.second};
      diss(pair, pair, {"a5"});
      t.composite_width = 2;
      break;
    }
  }
  return t;
}

}  // namespace detail

// Builds a profile with the planted defect and the expected analysis outcome.
// The shapes are calibrated: unsupported shape/plant combinations are
// rejected rather than silently producing a profile with an unknown truth.
inline GeneratedProfile generate(const PlantSpec& spec) {
  detail::validate_spec(spec);
  const detail::ShapeDef shape = detail::shape_def(spec.shape);

  GeneratedProfile out;
  out.spec = spec;
  out.truth = detail::ground_truth(spec);

  // Tree (declaration order fixes sibling order).
  RegionTree tree;
  for (const auto& sr : shape.regions) {
    RegionNode n;
    n.id = sr.id;
    n.label = sr.id == 0 ? "main" : "phase_" + std::to_string(sr.id);
    if (sr.parent >= 0) {
      n.parent = sr.parent;
      for (auto& pn : tree.nodes) {
        if (pn.id == sr.parent) {
          n.depth = pn.depth + 1;
          pn.children.push_back(sr.id);
          break;
        }
      }
    } else {
      tree.root = sr.id;
    }
    tree.nodes.push_back(n);
  }

  // Base inclusive samples: self plus all descendants, children first.
  std::map<int, MetricSample> base;
  for (const auto& sr : shape.regions) base[sr.id] = sr.self;
  base[tree.root].executed = true;
  for (auto it = shape.regions.rbegin(); it != shape.regions.rend(); ++it) {
    if (it->parent < 0) continue;
    MetricSample& p = base.at(it->parent);
    const MetricSample& c = base.at(it->id);
    p.wall_time += c.wall_time;
    p.cpu_time += c.cpu_time;
    p.cycles += c.cycles;
    p.instructions += c.instructions;
    p.l1_miss += c.l1_miss;
    p.l1_access += c.l1_access;
    p.l2_miss += c.l2_miss;
    p.l2_access += c.l2_access;
    p.mpi_time += c.mpi_time;
    p.mpi_bytes += c.mpi_bytes;
    p.disk_bytes += c.disk_bytes;
  }
  if (base.at(tree.root).wall_time > shape.total_wall) {
    throw std::logic_error("shape busy time exceeds its wall-time budget");
  }
  base.at(tree.root).wall_time = shape.total_wall;
  base.at(tree.root).cpu_time = shape.total_wall;

  // Per-rank noise factors 1 + k/1024, k in [-8, 8], drawn in rank order.
  std::mt19937 rng(spec.seed);
  std::vector<double> noise;
  noise.reserve(static_cast<std::size_t>(spec.ranks));
  for (int i = 0; i < spec.ranks; ++i) {
    const int k = static_cast<int>(rng() % 17u) - 8;
    noise.push_back(1.0 + static_cast<double>(k) / 1024.0);
  }

  std::vector<int> victims = spec.affected_ranks;
  std::sort(victims.begin(), victims.end());
  const std::vector<double> graded =
      detail::graded_multipliers(spec.intensity, victims.size());

  ProfileDataset ds;
  ds.program = shape.program;
  ds.tree = tree;
  ds.process_count = spec.ranks;
  ds.roles.assign(static_cast<std::size_t>(spec.ranks), Role::Worker);
  if (spec.shape == ShapeKind::StMaster14) ds.roles[0] = Role::Master;
  ds.region_order = ds.tree.region_ids();
  ds.samples.assign(static_cast<std::size_t>(spec.ranks) * ds.region_order.size(),
                    MetricSample{});

  static const std::vector<detail::SampleField> kNoised = {
      &MetricSample::wall_time, &MetricSample::cpu_time, &MetricSample::cycles,
      &MetricSample::instructions, &MetricSample::l1_miss,
      &MetricSample::l1_access, &MetricSample::l2_miss,
      &MetricSample::l2_access, &MetricSample::mpi_time};

  for (int rank = 0; rank < spec.ranks; ++rank) {
    std::map<int, MetricSample> incl = base;

    switch (spec.kind) {
      case ScenarioKind::Balanced:
        break;
      case ScenarioKind::ImbalancedRegion: {
        auto it = std::find(victims.begin(), victims.end(), rank);
        if (it != victims.end()) {
          const double m = graded[static_cast<std::size_t>(it - victims.begin())];
          detail::plant_scale(incl, ds.tree, spec.region, m,
                              detail::compute_fields());
        }
        break;
      }
      case ScenarioKind::HeavyRegion:
        detail::plant_scale(incl, ds.tree, spec.region, spec.intensity,
                            detail::heavy_fields(spec.heavy_metric));
        break;
      case ScenarioKind::CompositeImbalance: {
        if (std::find(victims.begin(), victims.end(), rank) != victims.end()) {
          detail::plant_scale(incl, ds.tree, spec.composite_pair.first,
                              spec.intensity, detail::compute_fields());
          detail::plant_scale(incl, ds.tree, spec.composite_pair.second,
                              spec.intensity, detail::compute_fields());
        }
        break;
      }
    }

    if (spec.shape == ShapeKind::StMaster14 && rank == 0) {
      // The coordinator does eight workers' worth of bookkeeping everywhere.
      for (auto& [id, s] : incl) {
        s.wall_time *= 8.0;
        s.cpu_time *= 8.0;
        s.cycles *= 8.0;
        s.instructions *= 8.0;
      }
    }

    const double f = noise[static_cast<std::size_t>(rank)];
    for (auto& [id, s] : incl) {
      for (detail::SampleField field : kNoised) s.*field *= f;
    }

    double busy = 0.0;
    for (int child : ds.tree.at(ds.tree.root).children) {
      busy += incl.at(child).wall_time;
    }
    if (busy > incl.at(ds.tree.root).wall_time * (1.0 + 1e-12)) {
      throw std::logic_error("generated rank busy time exceeds program time");
    }

    for (const auto& [id, s] : incl) ds.sample_mutable(rank, id) = s;
  }

  out.dataset = std::move(ds);
  return out;
}

// Catalog of ready-made scenarios covering every planted-defect family.
inline const std::vector<PlantSpec>& shipped_scenarios() {
  static const std::vector<PlantSpec> catalog = [] {
    std::vector<PlantSpec> v;
    auto add = [&](PlantSpec s) { v.push_back(std::move(s)); };

    PlantSpec balanced;
    balanced.name = "balanced";
    balanced.shape = ShapeKind::FlatBalanced14;
    balanced.kind = ScenarioKind::Balanced;
    balanced.seed = 11;
    add(balanced);

    PlantSpec nested;
    nested.name = "imbalanced-nested";
    nested.shape = ShapeKind::StCoarse14;
    nested.kind = ScenarioKind::ImbalancedRegion;
    nested.seed = 20;
    nested.region = 11;
    nested.affected_ranks = {4, 5, 6, 7};
    nested.intensity = 5;
    add(nested);

    PlantSpec deep = nested;
    deep.name = "imbalanced-deep";
    deep.shape = ShapeKind::StFine18;
    deep.seed = 21;
    deep.region = 21;
    add(deep);

    PlantSpec flat = nested;
    flat.name = "imbalanced-flat";
    flat.shape = ShapeKind::Flat8;
    flat.seed = 22;
    flat.region = 3;
    add(flat);

    PlantSpec composite;
    composite.name = "composite-pair";
    composite.shape = ShapeKind::Flat8;
    composite.kind = ScenarioKind::CompositeImbalance;
    composite.seed = 23;
    composite.affected_ranks = {4, 5, 6, 7};
    composite.intensity = 1.5;
    composite.composite_pair = {1, 2};
    add(composite);

    auto heavy = [&](const char* name, ShapeKind shape, unsigned seed, int region,
                     MetricKind metric, double intensity) {
      PlantSpec s;
      s.name = name;
      s.shape = shape;
      s.kind = ScenarioKind::HeavyRegion;
      s.seed = seed;
      s.region = region;
      s.heavy_metric = metric;
      s.intensity = intensity;
      add(s);
    };
    heavy("heavy-compute-network", ShapeKind::Npar12, 30, 12,
          MetricKind::NetworkBytes, 256);
    heavy("heavy-flat", ShapeKind::Mpibzip16, 31, 7, MetricKind::NetworkBytes, 4);
    heavy("heavy-disk", ShapeKind::Generic7Disk, 32, 3, MetricKind::DiskBytes,
          32768);
    heavy("heavy-l2", ShapeKind::Generic7L2, 33, 5, MetricKind::L2MissRate, 8);
    heavy("heavy-network", ShapeKind::Generic7Net, 34, 6,
          MetricKind::NetworkBytes, 1024);
    heavy("heavy-instructions", ShapeKind::Generic7Instr, 35, 3,
          MetricKind::InstructionsRetired, 8);
    heavy("heavy-l1", ShapeKind::Generic7L1, 36, 5, MetricKind::L1MissRate, 8);
    heavy("hotspot-before", ShapeKind::HotspotBase, 40, 11,
          MetricKind::L2MissRate, 8);
    heavy("hotspot-after", ShapeKind::HotspotTuned, 41, 11,
          MetricKind::InstructionsRetired, 1.25);

    PlantSpec master;
    master.name = "master-skew";
    master.shape = ShapeKind::StMaster14;
    master.kind = ScenarioKind::Balanced;
    master.seed = 50;
    master.excluded_ranks = {0};
    add(master);
    return v;
  }();
  return catalog;
}

inline const PlantSpec& find_scenario(const std::string& name) {
  for (const PlantSpec& s : shipped_scenarios()) {
    if (s.name == name) return s;
  }
  std::string names;
  for (const PlantSpec& s : shipped_scenarios()) {
    if (!names.empty()) names += ", ";
    names += s.name;
  }
  throw AnalysisError(ErrorCode::InvalidSpec,
                      "unknown scenario '" + name + "'; available: " + names);
}

}  // namespace spmdperf
