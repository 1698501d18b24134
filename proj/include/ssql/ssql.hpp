#pragma once

// Umbrella header: schema loading, the schema graph and its Steiner solver,
// the Spider SQL dialect front end, SQL <-> SSQL transpilation, beam
// reranking and the evaluation reports.

#include "ssql/error.hpp"
#include "ssql/eval.hpp"
#include "ssql/io.hpp"
#include "ssql/rerank.hpp"
#include "ssql/schema.hpp"
#include "ssql/schema_graph.hpp"
#include "ssql/sql_ast.hpp"
#include "ssql/sql_parse.hpp"
#include "ssql/sql_print.hpp"
#include "ssql/transpile.hpp"
