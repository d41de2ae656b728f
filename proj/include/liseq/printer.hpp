#pragma once

#include <sstream>
#include <string>

#include "liseq/ast.hpp"

namespace liseq {

namespace detail {

// Binding strength used to place parentheses; higher binds tighter.
inline int prec_of(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Bin:
      switch (e.op) {
        case BinOp::Or: return 1;
        case BinOp::Eq:
        case BinOp::Ne:
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge: return 2;
        case BinOp::Add:
        case BinOp::Sub: return 3;
        case BinOp::Mul:
        case BinOp::Div: return 4;
      }
      return 0;
    case ExprKind::Not: return 5;
    default: return 6;
  }
}

inline const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Or: return "||";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
  }
  return "?";
}

class Printer {
 public:
  std::string text() { return os_.str(); }

  void expr(const Expr& e, int parent_prec = 0) {
    int p = prec_of(e);
    bool paren = p < parent_prec;
    if (paren) os_ << '(';
    switch (e.kind) {
      case ExprKind::Const:
        if (e.is_bool_const) {
          os_ << (e.value ? "T" : "F");
        } else if (e.value < 0 && parent_prec > 0) {
          // a bare negative literal as an operand would lex as a minus
          os_ << '(' << e.value << ')';
        } else {
          os_ << e.value;
        }
        break;
      case ExprKind::Var:
        os_ << e.name;
        break;
      case ExprKind::Nondet:
        os_ << '*';
        break;
      case ExprKind::Not:
        os_ << '!';
        expr(e.args[0], p);
        break;
      case ExprKind::Bin:
        // binary operators are printed left-associated; the right operand gets
        // parens at equal precedence
        expr(e.args[0], p);
        os_ << ' ' << op_text(e.op) << ' ';
        expr(e.args[1], p + 1);
        break;
      case ExprKind::CallFn:
        os_ << e.name << '(';
        for (size_t i = 0; i < e.args.size(); ++i) {
          if (i) os_ << ", ";
          expr(e.args[i]);
        }
        os_ << ')';
        break;
    }
    if (paren) os_ << ')';
  }

  void type(const Type& t) {
    if (t.is_bool)
      os_ << "bool";
    else
      os_ << "int[" << t.lo << "," << t.hi << "]";
  }

  void vardecs(const std::vector<VarDecl>& ds) {
    for (const auto& d : ds) {
      indent();
      type(d.type);
      os_ << ' ' << d.name;
      if (d.init) {
        os_ << " := ";
        if (d.type.is_bool)
          os_ << (*d.init ? "T" : "F");
        else
          os_ << *d.init;
      }
      os_ << ";\n";
    }
  }

  void stmts(const std::vector<Stmt>& body) {
    for (const auto& s : body) stmt(s);
  }

  void stmt(const Stmt& s) {
    indent();
    switch (s.kind) {
      case StmtKind::Skip:
        os_ << "skip;\n";
        break;
      case StmtKind::Assign:
        os_ << s.lhs << " := ";
        expr(s.expr);
        os_ << ";\n";
        break;
      case StmtKind::Assume:
      case StmtKind::Assert:
        os_ << (s.kind == StmtKind::Assume ? "assume(" : "assert(");
        expr(s.expr);
        os_ << ");\n";
        break;
      case StmtKind::Call:
        if (!s.lhs.empty())
          os_ << s.lhs << " := " << s.callee << '(';
        else
          os_ << "call " << s.callee << '(';
        for (size_t i = 0; i < s.args.size(); ++i) {
          if (i) os_ << ", ";
          expr(s.args[i]);
        }
        os_ << ");\n";
        break;
      case StmtKind::Return:
        os_ << "return";
        if (s.has_expr) {
          os_ << ' ';
          expr(s.expr);
        }
        os_ << ";\n";
        break;
      case StmtKind::While:
        os_ << "while (";
        expr(s.expr);
        os_ << ") do\n";
        nested(s.body);
        indent();
        os_ << "od\n";
        break;
      case StmtKind::If:
        os_ << "if (";
        expr(s.expr);
        os_ << ") then\n";
        nested(s.body);
        if (!s.else_body.empty()) {
          indent();
          os_ << "else\n";
          nested(s.else_body);
        }
        indent();
        os_ << "fi\n";
        break;
      case StmtKind::Atomic:
        os_ << "atomic begin\n";
        nested(s.body);
        indent();
        os_ << "end\n";
        break;
    }
  }

  void procedure(const Procedure& f) {
    indent();
    if (f.ret)
      type(*f.ret);
    else
      os_ << "void";
    os_ << ' ' << f.name << '(';
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) os_ << ", ";
      type(f.params[i].type);
      os_ << ' ' << f.params[i].name;
    }
    os_ << ") begin\n";
    ++depth_;
    vardecs(f.locals);
    stmts(f.body);
    --depth_;
    indent();
    os_ << "end\n";
  }

  void param_program(const ParamProgram& p) {
    vardecs(p.shared);
    os_ << "init:\n";
    ++depth_;
    stmts(p.init_body);
    --depth_;
    for (const auto& proc : p.processes) {
      os_ << "\nprocess " << proc.name << ":\n";
      ++depth_;
      vardecs(proc.globals);
      for (const auto& f : proc.procs) {
        procedure(f);
      }
      --depth_;
    }
  }

  void seq_program(const SeqProgram& p) {
    vardecs(p.globals);
    for (const auto& f : p.procs) {
      os_ << '\n';
      procedure(f);
    }
  }

 private:
  void nested(const std::vector<Stmt>& body) {
    ++depth_;
    stmts(body);
    --depth_;
  }
  void indent() {
    for (int i = 0; i < depth_; ++i) os_ << "  ";
  }

  std::ostringstream os_;
  int depth_ = 0;
};

}  // namespace detail

inline std::string pretty_print(const ParamProgram& p) {
  detail::Printer pr;
  pr.param_program(p);
  return pr.text();
}

inline std::string pretty_print(const SeqProgram& p) {
  detail::Printer pr;
  pr.seq_program(p);
  return pr.text();
}

}  // namespace liseq
