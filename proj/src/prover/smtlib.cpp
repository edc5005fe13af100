#include <cctype>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "klrace/prover.hpp"

namespace klrace::prover {

using namespace sym;

namespace {

std::string quote(const std::string& s) { return "|" + s + "|"; }

class Encoder {
public:
    explicit Encoder(const Pure& atoms)
    {
        for (const auto& a : atoms)
            if (a.kind == Atom::Kind::Def)
                defs_.emplace(a.name, a.fun);
    }

    std::string atom(const Atom& a)
    {
        const std::string l = term(*a.lhs), r = term(*a.rhs);
        switch (a.kind) {
        case Atom::Kind::Eq: return "(= " + l + " " + r + ")";
        case Atom::Kind::Ne: return "(not (= " + l + " " + r + "))";
        case Atom::Kind::Le: return "(<= " + l + " " + r + ")";
        case Atom::Kind::Def: break;
        }
        return "true";
    }

    std::string declarations() const
    {
        std::string out;
        for (const auto& c : consts_)
            out += "(declare-fun " + c + " () Int)\n";
        for (const auto& [f, arity] : funs_) {
            out += "(declare-fun " + f + " (";
            for (int i = 0; i < arity; ++i)
                out += i ? " Int" : "Int";
            out += ") Int)\n";
        }
        return out;
    }

private:
    std::map<std::string, FunPtr> defs_;
    std::set<std::string> consts_;
    std::map<std::string, int> funs_;
    std::map<std::string, std::string> collectives_;
    int depth_ = 0;

    std::string constant(const std::string& name)
    {
        consts_.insert(quote(name));
        return quote(name);
    }

    std::string uf(const std::string& name, int arity)
    {
        funs_.emplace(quote(name), arity);
        return quote(name);
    }

    std::string term(const SymExpr& e)
    {
        switch (e.kind) {
        case SymExpr::Kind::Const:
            if (e.value >= 0)
                return std::to_string(e.value);
            // -(v + 1) - 1 avoids negating the minimum value.
            return "(- (- " + std::to_string(-(e.value + 1)) + ") 1)";
        case SymExpr::Kind::Var: return constant("v_" + e.name);
        case SymExpr::Kind::Logic: return constant("l_" + e.name);
        case SymExpr::Kind::Size: return constant("size_" + e.name);
        case SymExpr::Kind::Tid: return constant("tid");
        case SymExpr::Kind::Bound: return quote("b_" + e.name);
        case SymExpr::Kind::App: return apply(*e.fun, term(*e.args[0]));
        case SymExpr::Kind::Op: break;
        }
        const auto& a = e.args;
        switch (e.op) {
        case OpKind::Add: return "(+ " + term(*a[0]) + " " + term(*a[1]) + ")";
        case OpKind::Sub: return "(- " + term(*a[0]) + " " + term(*a[1]) + ")";
        case OpKind::Mul: return "(* " + term(*a[0]) + " " + term(*a[1]) + ")";
        case OpKind::Neg: return "(- " + term(*a[0]) + ")";
        // Truncating division and remainder differ from the SMT-LIB ones.
        case OpKind::Div: return "(" + uf("c_div", 2) + " " + term(*a[0]) + " " + term(*a[1]) + ")";
        case OpKind::Mod: return "(" + uf("c_mod", 2) + " " + term(*a[0]) + " " + term(*a[1]) + ")";
        case OpKind::Cos: return "(" + uf("c_cos", 1) + " " + term(*a[0]) + ")";
        case OpKind::Sqrt: return "(" + uf("c_sqrt", 1) + " " + term(*a[0]) + ")";
        }
        return "0";
    }

    std::string conj(const Pure& p)
    {
        std::string out;
        int n = 0;
        for (const auto& a : p) {
            if (a.kind == Atom::Kind::Def)
                continue;
            out += " " + atom(a);
            ++n;
        }
        if (n == 0)
            return "true";
        return n == 1 ? out.substr(1) : "(and" + out + ")";
    }

    std::string apply(const FunctionExpr& f, const std::string& arg)
    {
        switch (f.kind) {
        case FunctionExpr::Kind::Lambda:
            return "(let ((" + quote("b_" + f.var) + " " + arg + ")) " + term(*f.body) + ")";
        case FunctionExpr::Kind::Eta:
            return "(let ((" + quote("b_" + f.var) + " " + arg + ")) (ite " + conj(f.cond) + " " +
                   apply(*f.then_f, quote("b_" + f.var)) + " " + apply(*f.else_f, quote("b_" + f.var)) + "))";
        case FunctionExpr::Kind::Named: {
            auto it = defs_.find(f.name);
            if (it != defs_.end() && depth_ < 64) {
                ++depth_;
                std::string out = apply(*it->second, arg);
                --depth_;
                return out;
            }
            return "(" + uf("f_" + f.name, 1) + " " + arg + ")";
        }
        case FunctionExpr::Kind::Collective: {
            // Left uninterpreted: one symbol per distinct snapshot.
            const std::string key = sym::to_string(f);
            auto [it, fresh] = collectives_.emplace(key, "collective" + std::to_string(collectives_.size()));
            return "(" + uf(it->second, 1) + " " + arg + ")";
        }
        }
        return "0";
    }
};

}  // namespace

std::string to_smtlib(const Pure& atoms)
{
    Encoder enc(atoms);
    std::string asserts;
    for (const auto& a : atoms)
        if (a.kind != Atom::Kind::Def)
            asserts += "(assert " + enc.atom(a) + ")\n";
    return "(set-logic QF_UFNIA)\n" + enc.declarations() + asserts + "(check-sat)\n(exit)\n";
}

std::optional<std::string> run_solver(const std::string& solver, const std::string& script)
{
    char path[] = "/tmp/klrace-XXXXXX.smt2";
    const int fd = mkstemps(path, 5);
    if (fd < 0)
        return std::nullopt;
    close(fd);
    {
        std::ofstream out(path);
        out << script;
    }
    std::optional<std::string> answer;
    const std::string cmd = solver + " " + path + " 2>/dev/null";
    if (FILE* p = popen(cmd.c_str(), "r")) {
        std::array<char, 256> buf{};
        if (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) {
            std::string line(buf.data());
            while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
                line.pop_back();
            answer = line;
        }
        pclose(p);
    }
    std::remove(path);
    return answer;
}

}  // namespace klrace::prover
