#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "caero/simlab.hpp"

namespace caero::cli {

struct TableRow {
    std::string scheme;  // first column group, e.g. constant / relative / cost-aware
    std::string method;
    SimConfig config;
};

struct TableSpec {
    std::string id;
    std::string title;
    std::vector<TableRow> rows;
};

inline const std::vector<std::string> kTableIds = {"t1", "t2", "t4", "t5", "t6"};

// Rows for a table id; base supplies iteration count, seeds, threads and budget.
// Throws ValidationError for an unknown id.
TableSpec table_spec(const std::string& id, const SimConfig& base);

SimConfig baseline_row(const SimConfig& base, const std::string& policy, SchemeKind scheme, double n);
SimConfig cost_aware_row(const SimConfig& base, NRule rule, double a, double init_rho);

// Row configs for the table's individual entry points.
SimConfig t1_constant_ero(const SimConfig& base);
SimConfig t1_constant_spending(const SimConfig& base);
SimConfig t1_cost_aware_cap10(const SimConfig& base);
SimConfig t4_cost_aware_cap10(const SimConfig& base);
SimConfig t2_horizon(const SimConfig& base, std::size_t horizon);
SimConfig t5_row(const SimConfig& base, double specified_q);
inline const std::vector<double> kSensitivityGrid = {0.5, 0.7, 0.8, 0.85, 0.89, 0.9};

std::vector<AggregateReport> run_table(const TableSpec& table);

void render_table(std::ostream& out, const TableSpec& table, const std::vector<AggregateReport>& reports);
void write_table_csv(std::ostream& out, const TableSpec& table, const std::vector<AggregateReport>& reports);

}  // namespace caero::cli
