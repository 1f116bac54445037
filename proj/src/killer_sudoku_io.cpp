#include <fstream>
#include <sstream>

#include "mcopt/killer_sudoku.hpp"
#include "mcopt/text.hpp"

namespace mcopt::killer_sudoku {

Instance parse(std::istream& in, const std::string& source_name) {
  auto fail = [&](std::size_t line, const std::string& message) {
    return ParseError(source_name, line, message);
  };

  Instance inst;
  bool saw_header = false;
  std::size_t last_line = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto fields = text::split_ws(line);
    if (fields.empty()) continue;
    last_line = line_no;

    if (!saw_header) {
      if (fields.size() != 2 || fields[0] != "killersudoku") {
        throw fail(line_no, "expected 'killersudoku <box_size>'");
      }
      const auto box = text::parse_int(fields[1]);
      if (!box || *box < 2 || *box > 7) throw fail(line_no, "box size must be an integer in 2..7");
      inst.box_size = static_cast<int>(*box);
      saw_header = true;
      continue;
    }
    if (fields[0] != "cage") throw fail(line_no, "expected 'cage <target> r,c ...'");
    if (fields.size() < 3) throw fail(line_no, "cage needs a target and at least one cell");
    const auto target = text::parse_int(fields[1]);
    if (!target) throw fail(line_no, "malformed cage target");
    Cage cage;
    cage.target = static_cast<int>(*target);
    for (std::size_t f = 2; f < fields.size(); ++f) {
      const auto comma = fields[f].find(',');
      if (comma == std::string_view::npos) throw fail(line_no, "cell must be written as r,c");
      const auto r = text::parse_int(fields[f].substr(0, comma));
      const auto c = text::parse_int(fields[f].substr(comma + 1));
      if (!r || !c) throw fail(line_no, "malformed cell '" + std::string(fields[f]) + "'");
      cage.cells.push_back({static_cast<int>(*r), static_cast<int>(*c)});
    }
    inst.cages.push_back(std::move(cage));
    // per-cage checks report the cage's own line
    try {
      const int n = inst.n();
      const auto& cage_ref = inst.cages.back();
      const auto k = static_cast<int>(cage_ref.cells.size());
      if (k > n) throw InvalidInstance("cage has more than n cells");
      if (cage_ref.target < k || cage_ref.target > k * n) {
        throw InvalidInstance("cage target " + std::to_string(cage_ref.target) + " is unreachable");
      }
      for (std::size_t a = 0; a < cage_ref.cells.size(); ++a) {
        const auto& cell = cage_ref.cells[a];
        if (cell.row < 0 || cell.row >= n || cell.col < 0 || cell.col >= n) {
          throw InvalidInstance("cell outside the grid");
        }
        for (std::size_t c = 0; c + 1 < inst.cages.size(); ++c) {
          for (const auto& other : inst.cages[c].cells) {
            if (other == cell) throw InvalidInstance("cell already belongs to another cage");
          }
        }
        for (std::size_t b = 0; b < a; ++b) {
          if (cage_ref.cells[b] == cell) throw InvalidInstance("cell listed twice");
        }
      }
    } catch (const InvalidInstance& e) {
      throw fail(line_no, e.what());
    }
  }
  if (!saw_header) throw fail(line_no, "missing 'killersudoku <box_size>' header");
  try {
    inst.validate();
  } catch (const InvalidInstance& e) {
    throw fail(last_line, e.what());
  }
  return inst;
}

Instance parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return parse(in, path);
}

std::string serialize(const Instance& instance) {
  std::ostringstream out;
  out << "killersudoku " << instance.box_size << '\n';
  for (const auto& cage : instance.cages) {
    out << "cage " << cage.target;
    for (const auto& cell : cage.cells) out << ' ' << cell.row << ',' << cell.col;
    out << '\n';
  }
  return out.str();
}

}  // namespace mcopt::killer_sudoku
