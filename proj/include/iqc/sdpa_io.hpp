#ifndef IQC_SDPA_IO_HPP
#define IQC_SDPA_IO_HPP

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "iqc/json_io.hpp"
#include "iqc/sdp.hpp"

namespace iqc {

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Upper-triangle coordinates of an n×n block, column-major.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> upper_entries(Eigen::Index n) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) out.emplace_back(i, j);
  return out;
}

}  // namespace detail

/// SDPA sparse format: minimize cᵀy subject to Σᵢ Fᵢ yᵢ − F₀ ⪰ 0.
///
/// A block C + Σ yᵢ Fᵢ is written with F₀ = −C. Equality blocks become LP blocks holding each
/// upper-triangle entry twice, with signs + and −. Variable names, block kinds and metadata are
/// kept in `*` comment lines so that import restores the problem exactly.
inline std::string export_sdpa(const SdpProblem& p) {
  std::ostringstream os;
  os << "* iqc sdpa export\n";
  os << "* symmetric variables are vectorized column-major over the upper triangle\n";
  for (const auto& v : p.variables)
    os << "* variable " << v.name << ' ' << (v.kind == VarKind::Symmetric ? "symmetric" : "general") << ' ' << v.dim
       << '\n';
  for (const auto& b : p.blocks) os << "* block " << b.label << ' ' << to_string(b.kind) << ' ' << b.size() << '\n';
  for (const auto& [k, v] : p.metadata) os << "* meta " << Json(k).dump() << ' ' << Json(v).dump() << '\n';
  os << "* objective " << (p.objective ? "minimize" : "none") << '\n';

  const int m = p.scalar_count();
  os << m << '\n' << p.blocks.size() << '\n';
  for (std::size_t j = 0; j < p.blocks.size(); ++j) {
    const auto& b = p.blocks[j];
    const auto n = b.size();
    if (j) os << ' ';
    if (b.kind == BlockKind::Equality)
      os << -static_cast<long>(n * (n + 1));
    else
      os << n;
  }
  os << '\n';
  for (int i = 0; i < m; ++i) os << (i ? " " : "") << detail::fmt17(p.objective ? (*p.objective)(i) : 0.0);
  os << '\n';

  auto emit = [&](int mat, std::size_t blk, Eigen::Index i, Eigen::Index j, double v) {
    if (v != 0.0) os << mat << ' ' << blk + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << detail::fmt17(v) << '\n';
  };
  auto emit_matrix = [&](int mat, std::size_t blk, const LmiBlock& b, const Matrix& f, double sign) {
    const auto entries = detail::upper_entries(b.size());
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto [i, j] = entries[e];
      const double v = sign * f(i, j);
      if (b.kind == BlockKind::Equality) {
        const auto row = static_cast<Eigen::Index>(2 * e);
        emit(mat, blk, row, row, v);
        emit(mat, blk, row + 1, row + 1, -v);
      } else {
        emit(mat, blk, i, j, v);
      }
    }
  };
  for (std::size_t j = 0; j < p.blocks.size(); ++j) emit_matrix(0, j, p.blocks[j], p.blocks[j].constant, -1.0);
  for (int i = 0; i < m; ++i)
    for (std::size_t j = 0; j < p.blocks.size(); ++j)
      for (const auto& [idx, f] : p.blocks[j].terms)
        if (idx == i) emit_matrix(i + 1, j, p.blocks[j], f, 1.0);
  return os.str();
}

inline SdpProblem import_sdpa(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  SdpProblem p;
  struct BlockInfo {
    std::string label;
    BlockKind kind;
    Eigen::Index size;
  };
  std::vector<BlockInfo> infos;
  bool has_objective = true;
  std::vector<std::string> body;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '*' || line[0] == '"') {
      std::istringstream ls(line.substr(1));
      std::string tag;
      ls >> tag;
      if (tag == "variable") {
        std::string name, kind;
        int dim = 0;
        ls >> name >> kind >> dim;
        p.variables.push_back({name, kind == "general" ? VarKind::General : VarKind::Symmetric, dim});
      } else if (tag == "block") {
        std::string label, kind;
        Eigen::Index size = 0;
        ls >> label >> kind >> size;
        infos.push_back({label, block_kind_from_string(kind), size});
      } else if (tag == "meta") {
        std::string rest;
        std::getline(ls, rest);
        std::istringstream rs(rest);
        Json k, v;
        rs >> k >> v;
        p.metadata[k.get<std::string>()] = v.get<std::string>();
      } else if (tag == "objective") {
        std::string mode;
        ls >> mode;
        has_objective = mode != "none";
      }
      continue;
    }
    body.push_back(line);
  }
  std::string joined;
  for (const auto& l : body) joined += l + '\n';
  for (char& c : joined)
    if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
  std::istringstream bs(joined);
  int m = 0, nblocks = 0;
  if (!(bs >> m >> nblocks)) throw Error(ErrorCode::ParseError, "sdpa: missing header counts");
  std::vector<long> structure(nblocks);
  for (auto& s : structure)
    if (!(bs >> s)) throw Error(ErrorCode::ParseError, "sdpa: truncated block structure");
  Vector c(m);
  for (int i = 0; i < m; ++i)
    if (!(bs >> c(i))) throw Error(ErrorCode::ParseError, "sdpa: truncated objective");

  if (p.variables.empty()) {
    for (int i = 0; i < m; ++i) p.variables.push_back({"y" + std::to_string(i + 1), VarKind::Symmetric, 1});
  }
  if (p.scalar_count() != m) throw Error(ErrorCode::ParseError, "sdpa: variable comments disagree with the count");
  if (infos.empty()) {
    for (int j = 0; j < nblocks; ++j) {
      const Eigen::Index n = structure[j] < 0 ? -structure[j] : structure[j];
      infos.push_back({"block" + std::to_string(j + 1), BlockKind::NonStrict, n});
    }
  }
  if (static_cast<int>(infos.size()) != nblocks) throw Error(ErrorCode::ParseError, "sdpa: block comments disagree");

  // raw per-matrix storage in the file's own block shapes
  std::vector<std::vector<Matrix>> raw(m + 1, std::vector<Matrix>(nblocks));
  std::vector<Eigen::Index> raw_size(nblocks);
  for (int j = 0; j < nblocks; ++j) raw_size[j] = structure[j] < 0 ? -structure[j] : structure[j];
  for (int mat = 0; mat <= m; ++mat)
    for (int j = 0; j < nblocks; ++j) raw[mat][j] = Matrix::Zero(raw_size[j], raw_size[j]);
  std::vector<std::vector<bool>> touched(m + 1, std::vector<bool>(nblocks, false));
  int mat = 0, blk = 0;
  Eigen::Index i = 0, j = 0;
  double v = 0.0;
  while (bs >> mat >> blk >> i >> j >> v) {
    if (mat < 0 || mat > m || blk < 1 || blk > nblocks || i < 1 || j < 1 || i > raw_size[blk - 1] ||
        j > raw_size[blk - 1])
      throw Error(ErrorCode::ParseError, "sdpa: entry index out of range");
    Matrix& f = raw[mat][blk - 1];
    f(i - 1, j - 1) = v;
    f(j - 1, i - 1) = v;
    touched[mat][blk - 1] = true;
  }

  for (int b = 0; b < nblocks; ++b) {
    LmiBlock block;
    block.label = infos[b].label;
    block.kind = infos[b].kind;
    const Eigen::Index n = infos[b].size;
    auto decode = [&](const Matrix& f) {
      if (block.kind != BlockKind::Equality) return f;
      Matrix out = Matrix::Zero(n, n);
      const auto entries = detail::upper_entries(n);
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const auto [r, s] = entries[e];
        out(r, s) = f(2 * e, 2 * e);
        out(s, r) = out(r, s);
      }
      return out;
    };
    block.constant = -decode(raw[0][b]);
    block.constant += Matrix::Zero(n, n);  // normalizes -0.0 entries
    for (int k = 1; k <= m; ++k)
      if (touched[k][b]) block.terms.emplace_back(k - 1, decode(raw[k][b]));
    p.blocks.push_back(std::move(block));
  }
  if (has_objective) p.objective = c;
  return p;
}

/// Solution import: JSON {"name": [[...]] | {"rows","cols","value"}}, a flat whitespace/comma
/// separated vector of all scalar coordinates, or repeated "name rows cols v…" records.
inline VarValues import_solution(const SdpProblem& problem, const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{' && text.find('"') != std::string::npos) {
    const Json j = Json::parse(text);
    VarValues out;
    for (const auto& [name, entry] : j.items()) {
      if (entry.is_array()) {
        const auto& decl = problem.variable(name);
        out.emplace(name, matrix_from_json(entry, decl.dim));
      } else {
        out.emplace(name, var_values_from_json(Json{{name, entry}}).at(name));
      }
    }
    for (const auto& v : problem.variables)
      if (!out.count(v.name)) throw Error(ErrorCode::MissingVariable, "solution lacks '" + v.name + "'");
    return out;
  }
  std::string cleaned = text;
  for (char& c : cleaned)
    if (c == ',' || c == '{' || c == '}' || c == '[' || c == ']' || c == '=') c = ' ';
  std::istringstream is(cleaned);
  std::vector<std::string> tokens;
  for (std::string t; is >> t;) tokens.push_back(t);
  auto is_number = [](const std::string& t) {
    char* end = nullptr;
    std::strtod(t.c_str(), &end);
    return end && *end == '\0';
  };
  if (!tokens.empty() && std::all_of(tokens.begin(), tokens.end(), is_number)) {
    Vector y(static_cast<Eigen::Index>(tokens.size()));
    for (std::size_t k = 0; k < tokens.size(); ++k) y(static_cast<Eigen::Index>(k)) = std::stod(tokens[k]);
    if (y.size() != problem.scalar_count())
      throw Error(ErrorCode::DimensionMismatch, "solution vector length differs from the variable count");
    return problem.unpack(y);
  }
  VarValues out;
  std::size_t at = 0;
  while (at < tokens.size()) {
    if (at + 3 > tokens.size()) throw Error(ErrorCode::ParseError, "solution: truncated record header");
    const std::string name = tokens[at];
    const auto rows = std::stol(tokens[at + 1]), cols = std::stol(tokens[at + 2]);
    at += 3;
    if (at + static_cast<std::size_t>(rows * cols) > tokens.size()) throw Error(ErrorCode::ParseError, "solution: truncated matrix");
    Matrix m(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) m(r, c) = std::stod(tokens[at++]);
    out.emplace(name, std::move(m));
  }
  for (const auto& v : problem.variables)
    if (!out.count(v.name)) throw Error(ErrorCode::MissingVariable, "solution lacks '" + v.name + "'");
  return out;
}

}  // namespace iqc

#endif  // IQC_SDPA_IO_HPP
