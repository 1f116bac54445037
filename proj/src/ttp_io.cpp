#include <fstream>
#include <algorithm>
#include <map>
#include <sstream>

#include "mcopt/text.hpp"
#include "mcopt/ttp.hpp"

namespace mcopt::ttp {

namespace {

using text::format_number;

enum class Section { header, coordinates, items, matrix };

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

Instance parse(std::istream& in, const std::string& source_name, const ParseOptions& options) {
  auto fail = [&](std::size_t line, const std::string& message) -> ParseError {
    return ParseError(source_name, line, message);
  };

  Instance inst;
  std::map<std::string, std::pair<std::string, std::size_t>> header;
  std::map<long long, std::array<double, 2>> coords;
  std::map<long long, Item> items;
  std::vector<std::vector<double>> matrix;
  bool saw_coords = false;
  bool saw_matrix = false;
  std::size_t matrix_line = 0;
  Section section = Section::header;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (starts_with(line, "NODE_COORD_SECTION")) {
      if (saw_coords) throw fail(line_no, "duplicate NODE_COORD_SECTION");
      section = Section::coordinates;
      saw_coords = true;
      continue;
    }
    if (starts_with(line, "ITEMS SECTION")) {
      section = Section::items;
      continue;
    }
    if (starts_with(line, "MATRIX SECTION")) {
      if (saw_matrix) throw fail(line_no, "duplicate MATRIX SECTION");
      section = Section::matrix;
      saw_matrix = true;
      matrix_line = line_no;
      continue;
    }
    if (line == "EOF") break;

    switch (section) {
      case Section::header: {
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) throw fail(line_no, "expected 'KEY: value'");
        std::string key(text::trim(line.substr(0, colon)));
        std::string value(text::trim(line.substr(colon + 1)));
        static const char* known[] = {"PROBLEM NAME", "KNAPSACK DATA TYPE", "DIMENSION",
                                      "NUMBER OF ITEMS", "CAPACITY OF KNAPSACK", "MIN SPEED",
                                      "MAX SPEED", "RENTING RATIO", "EDGE_WEIGHT_TYPE"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
          throw fail(line_no, "unknown header key '" + key + "'");
        }
        if (!header.emplace(key, std::make_pair(value, line_no)).second) {
          throw fail(line_no, "duplicate header key '" + key + "'");
        }
        break;
      }
      case Section::coordinates: {
        const auto fields = text::split_ws(line);
        if (fields.size() != 3) throw fail(line_no, "expected 'index x y'");
        const auto index = text::parse_int(fields[0]);
        const auto x = text::parse_double(fields[1]);
        const auto y = text::parse_double(fields[2]);
        if (!index || !x || !y) throw fail(line_no, "malformed coordinate line");
        if (!coords.emplace(*index, std::array<double, 2>{*x, *y}).second) {
          throw fail(line_no, "duplicate node index " + std::to_string(*index));
        }
        break;
      }
      case Section::items: {
        const auto fields = text::split_ws(line);
        if (fields.size() != 4) throw fail(line_no, "expected 'index profit weight assigned_node'");
        const auto index = text::parse_int(fields[0]);
        const auto profit = text::parse_double(fields[1]);
        const auto weight = text::parse_double(fields[2]);
        const auto node = text::parse_int(fields[3]);
        if (!index || !profit || !weight || !node) throw fail(line_no, "malformed item line");
        if (*node < 2) throw fail(line_no, "items must be assigned to a node other than node 1");
        if (*profit < 0.0 || *weight <= 0.0) {
          throw fail(line_no, "item needs profit >= 0 and weight > 0");
        }
        Item item{*profit, *weight, static_cast<std::size_t>(*node - 1)};
        if (!items.emplace(*index, item).second) {
          throw fail(line_no, "duplicate item index " + std::to_string(*index));
        }
        break;
      }
      case Section::matrix: {
        std::vector<double> row;
        for (auto field : text::split_ws(line)) {
          const auto d = text::parse_double(field);
          if (!d) throw fail(line_no, "malformed distance '" + std::string(field) + "'");
          row.push_back(*d);
        }
        matrix.push_back(std::move(row));
        break;
      }
    }
  }

  auto required = [&](const std::string& key) -> std::pair<std::string, std::size_t> {
    auto it = header.find(key);
    if (it == header.end()) throw fail(line_no, "missing header key '" + key + "'");
    return it->second;
  };
  auto number = [&](const std::string& key) {
    const auto [value, line] = required(key);
    const auto parsed = text::parse_double(value);
    if (!parsed) throw fail(line, "'" + key + "' is not a number");
    return *parsed;
  };
  auto count = [&](const std::string& key) {
    const auto [value, line] = required(key);
    const auto parsed = text::parse_int(value);
    if (!parsed || *parsed < 0) throw fail(line, "'" + key + "' is not a non-negative integer");
    return static_cast<std::size_t>(*parsed);
  };

  if (auto it = header.find("PROBLEM NAME"); it != header.end()) inst.name = it->second.first;
  if (auto it = header.find("KNAPSACK DATA TYPE"); it != header.end()) {
    inst.knapsack_data_type = it->second.first;
  }
  if (auto it = header.find("EDGE_WEIGHT_TYPE"); it != header.end()) {
    inst.edge_weight_type = it->second.first;
  }
  inst.city_count = count("DIMENSION");
  const auto item_count = count("NUMBER OF ITEMS");
  inst.capacity = number("CAPACITY OF KNAPSACK");
  inst.min_speed = number("MIN SPEED");
  inst.max_speed = number("MAX SPEED");
  inst.renting_rate = number("RENTING RATIO");

  if (saw_coords == saw_matrix) {
    throw fail(line_no, "expected exactly one of NODE_COORD_SECTION or MATRIX SECTION");
  }
  if (saw_coords) {
    inst.source = DistanceSource::coordinates;
    for (std::size_t c = 1; c <= inst.city_count; ++c) {
      auto it = coords.find(static_cast<long long>(c));
      if (it == coords.end()) throw fail(line_no, "missing coordinates of node " + std::to_string(c));
      inst.coordinates.push_back(it->second);
    }
    if (coords.size() != inst.city_count) throw fail(line_no, "node indices outside 1..DIMENSION");
    compute_distances(inst, options.round_distances);
  } else {
    inst.source = DistanceSource::matrix;
    if (matrix.size() != inst.city_count) {
      throw fail(matrix_line, "MATRIX SECTION needs DIMENSION rows");
    }
    for (const auto& row : matrix) {
      if (row.size() != inst.city_count) {
        throw fail(matrix_line, "MATRIX SECTION rows need DIMENSION entries");
      }
      inst.distances.insert(inst.distances.end(), row.begin(), row.end());
    }
  }

  for (std::size_t j = 1; j <= item_count; ++j) {
    auto it = items.find(static_cast<long long>(j));
    if (it == items.end()) throw fail(line_no, "missing item " + std::to_string(j));
    if (it->second.city >= inst.city_count) {
      throw fail(line_no, "item " + std::to_string(j) + " is assigned to an unknown node");
    }
    inst.items.push_back(it->second);
  }
  if (items.size() != item_count) throw fail(line_no, "item indices outside 1..NUMBER OF ITEMS");

  try {
    inst.validate();
  } catch (const InvalidInstance& e) {
    throw fail(saw_matrix ? matrix_line : line_no, e.what());
  }
  return inst;
}

Instance parse_file(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return parse(in, path, options);
}

std::string serialize(const Instance& inst) {
  std::ostringstream out;
  out << "PROBLEM NAME:\t" << inst.name << '\n'
      << "KNAPSACK DATA TYPE:\t" << inst.knapsack_data_type << '\n'
      << "DIMENSION:\t" << inst.city_count << '\n'
      << "NUMBER OF ITEMS:\t" << inst.items.size() << '\n'
      << "CAPACITY OF KNAPSACK:\t" << format_number(inst.capacity) << '\n'
      << "MIN SPEED:\t" << format_number(inst.min_speed) << '\n'
      << "MAX SPEED:\t" << format_number(inst.max_speed) << '\n'
      << "RENTING RATIO:\t" << format_number(inst.renting_rate) << '\n'
      << "EDGE_WEIGHT_TYPE:\t" << inst.edge_weight_type << '\n';
  if (inst.source == DistanceSource::coordinates) {
    out << "NODE_COORD_SECTION\t(INDEX, X, Y):\n";
    for (std::size_t c = 0; c < inst.city_count; ++c) {
      out << c + 1 << '\t' << format_number(inst.coordinates[c][0]) << '\t'
          << format_number(inst.coordinates[c][1]) << '\n';
    }
  } else {
    out << "MATRIX SECTION\n";
    for (std::size_t a = 0; a < inst.city_count; ++a) {
      for (std::size_t b = 0; b < inst.city_count; ++b) {
        out << (b == 0 ? "" : "\t") << format_number(inst.distance(a, b));
      }
      out << '\n';
    }
  }
  out << "ITEMS SECTION\t(INDEX, PROFIT, WEIGHT, ASSIGNED NODE NUMBER):\n";
  for (std::size_t j = 0; j < inst.items.size(); ++j) {
    const auto& item = inst.items[j];
    out << j + 1 << '\t' << format_number(item.profit) << '\t' << format_number(item.weight) << '\t'
        << item.city + 1 << '\n';
  }
  return out.str();
}

}  // namespace mcopt::ttp
