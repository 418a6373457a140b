#include "kava/skos.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "kava/error.hpp"

namespace kava {

std::string_view findingCodeName(FindingCode code) {
  switch (code) {
    case FindingCode::BroaderCycle: return "BroaderCycle";
    case FindingCode::DanglingEdge: return "DanglingEdge";
    case FindingCode::MissingLabel: return "MissingLabel";
    case FindingCode::NotInScheme: return "NotInScheme";
    case FindingCode::AsymmetricRelated: return "AsymmetricRelated";
    case FindingCode::MalformedManifestation: return "MalformedManifestation";
    case FindingCode::InvalidQuery: return "InvalidQuery";
    case FindingCode::ForeignDialect: return "ForeignDialect";
  }
  return "Unknown";
}

const Concept* ConceptScheme::find(const std::string& conceptId) const {
  auto it = concepts.find(conceptId);
  return it == concepts.end() ? nullptr : &it->second;
}

std::size_t ConceptScheme::broaderEdgeCount() const {
  std::size_t n = 0;
  for (const auto& [id, c] : concepts) {
    for (const std::string& b : c.broader) {
      if (concepts.contains(b)) ++n;
    }
  }
  return n;
}

namespace {

std::set<std::string> iriObjects(const Graph& graph, const Term& subject,
                                 const Term& predicate) {
  std::set<std::string> out;
  for (const Triple& t : graph.match(subject, predicate, std::nullopt)) {
    if (t.object.isIri()) out.insert(t.object.value());
  }
  return out;
}

std::vector<Term> conceptSubjects(const Graph& graph) {
  std::vector<Term> out;
  for (const Triple& t :
       graph.match(std::nullopt, vocab::rdfType(), vocab::skos("Concept"))) {
    if (t.subject.isIri()) out.push_back(t.subject);
  }
  return out;
}

}  // namespace

std::vector<std::string> schemeIds(const Graph& graph) {
  std::set<std::string> ids;
  for (const Term& c : conceptSubjects(graph)) {
    auto in = iriObjects(graph, c, vocab::skos("inScheme"));
    ids.insert(in.begin(), in.end());
  }
  return {ids.begin(), ids.end()};
}

ConceptScheme loadScheme(const Graph& graph, const std::string& schemeId) {
  ConceptScheme scheme;
  scheme.id = schemeId;
  const Term prefLabel = vocab::skos("prefLabel");
  for (const Term& subject : conceptSubjects(graph)) {
    auto schemes = iriObjects(graph, subject, vocab::skos("inScheme"));
    if (schemes.empty()) {
      scheme.loadFindings.push_back(
          {FindingCode::NotInScheme, Severity::Warning, subject.value(), {},
           "concept has no skos:inScheme and was ignored"});
      continue;
    }
    if (!schemes.contains(schemeId)) continue;
    Concept c;
    c.id = subject.value();
    c.inScheme = schemeId;
    for (const Triple& t : graph.match(subject, prefLabel, std::nullopt)) {
      if (t.object.isLiteral() && !t.object.value().empty()) {
        c.prefLabel = t.object.value();
        break;
      }
    }
    c.broader = iriObjects(graph, subject, vocab::skos("broader"));
    c.narrower = iriObjects(graph, subject, vocab::skos("narrower"));
    c.related = iriObjects(graph, subject, vocab::skos("related"));
    scheme.concepts.emplace(c.id, std::move(c));
  }
  if (scheme.concepts.empty()) {
    throw Error(ErrorCode::EmptyScheme, "no concepts in scheme " + schemeId);
  }
  for (auto& [id, c] : scheme.concepts) {
    for (const std::string& b : c.broader) {
      if (auto it = scheme.concepts.find(b); it != scheme.concepts.end()) {
        it->second.narrower.insert(id);
      }
    }
    for (const std::string& n : c.narrower) {
      if (auto it = scheme.concepts.find(n); it != scheme.concepts.end()) {
        it->second.broader.insert(id);
      }
    }
  }
  return scheme;
}

namespace {

// Tarjan's strongly connected components over in-scheme broader edges.
std::vector<std::vector<std::string>> broaderComponents(
    const ConceptScheme& scheme) {
  std::map<std::string, int> index;
  std::map<std::string, int> low;
  std::set<std::string> onStack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;

  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    onStack.insert(v);
    for (const std::string& w : scheme.concepts.at(v).broader) {
      if (!scheme.concepts.contains(w)) continue;
      if (!index.contains(w)) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (onStack.contains(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> component;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        onStack.erase(w);
        component.push_back(w);
      } while (w != v);
      std::sort(component.begin(), component.end());
      out.push_back(std::move(component));
    }
  };
  for (const auto& [id, c] : scheme.concepts) {
    if (!index.contains(id)) visit(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Shortest broader path from `start` back to itself inside `members`.
std::vector<std::string> cycleThrough(const ConceptScheme& scheme,
                                      const std::string& start,
                                      const std::set<std::string>& members) {
  std::map<std::string, std::string> parent;
  std::deque<std::string> queue{start};
  std::set<std::string> seen;
  while (!queue.empty()) {
    std::string v = queue.front();
    queue.pop_front();
    for (const std::string& w : scheme.concepts.at(v).broader) {
      if (!members.contains(w)) continue;
      if (w == start) {
        std::vector<std::string> path{start};
        for (std::string x = v; x != start; x = parent.at(x)) path.push_back(x);
        std::reverse(path.begin() + 1, path.end());
        path.push_back(start);
        return path;
      }
      if (seen.insert(w).second) {
        parent[w] = v;
        queue.push_back(w);
      }
    }
  }
  return {start, start};
}

}  // namespace

std::vector<Finding> validateScheme(const ConceptScheme& scheme) {
  std::vector<Finding> findings = scheme.loadFindings;

  for (const auto& component : broaderComponents(scheme)) {
    const std::string& first = component.front();
    bool selfLoop = scheme.concepts.at(first).broader.contains(first);
    if (component.size() < 2 && !selfLoop) continue;
    std::set<std::string> members(component.begin(), component.end());
    auto path = cycleThrough(scheme, first, members);
    std::string text;
    for (std::size_t i = 0; i < path.size(); ++i) {
      text += (i ? " -> " : "") + path[i];
    }
    findings.push_back({FindingCode::BroaderCycle, Severity::Error, first,
                        path, "skos:broader cycle: " + text});
  }

  for (const auto& [id, c] : scheme.concepts) {
    if (c.prefLabel.empty()) {
      findings.push_back({FindingCode::MissingLabel, Severity::Error, id, {},
                          "concept has no skos:prefLabel"});
    }
    auto dangling = [&](const std::set<std::string>& targets,
                        const char* relation) {
      for (const std::string& t : targets) {
        if (!scheme.concepts.contains(t)) {
          findings.push_back(
              {FindingCode::DanglingEdge, Severity::Warning, id, {id, t},
               std::string("skos:") + relation +
                   " target is not a concept of scheme " + scheme.id});
        }
      }
    };
    dangling(c.broader, "broader");
    dangling(c.narrower, "narrower");
    dangling(c.related, "related");
    for (const std::string& r : c.related) {
      const Concept* other = scheme.find(r);
      if (other && !other->related.contains(id)) {
        findings.push_back({FindingCode::AsymmetricRelated, Severity::Warning,
                            id, {id, r},
                            "skos:related is not asserted in both directions"});
      }
    }
  }
  return findings;
}

bool hasErrors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Severity::Error;
  });
}

namespace {

std::vector<std::string> closure(
    const ConceptScheme& scheme, const std::string& id,
    std::set<std::string> Concept::*edges) {
  const Concept* root = scheme.find(id);
  if (!root) throw Error(ErrorCode::UnknownConcept, id);
  std::vector<std::string> out;
  std::set<std::string> seen{id};
  std::vector<std::string> level{id};
  while (!level.empty()) {
    std::set<std::string> next;
    for (const std::string& v : level) {
      for (const std::string& w : scheme.concepts.at(v).*edges) {
        if (scheme.concepts.contains(w) && !seen.contains(w)) next.insert(w);
      }
    }
    level.assign(next.begin(), next.end());
    for (const std::string& w : level) {
      seen.insert(w);
      out.push_back(w);
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> broaderClosure(const ConceptScheme& scheme,
                                        const std::string& id) {
  return closure(scheme, id, &Concept::broader);
}

std::vector<std::string> narrowerClosure(const ConceptScheme& scheme,
                                         const std::string& id) {
  return closure(scheme, id, &Concept::narrower);
}

}  // namespace kava
