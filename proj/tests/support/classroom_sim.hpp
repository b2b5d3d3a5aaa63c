#pragma once

// Classroom simulation: one teacher and N scripted students working in
// parallel threads, then a broadcast. Reports convergence and replay checks.

#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "support/fixtures.hpp"
#include "support/sim_client.hpp"
#include "support/world.hpp"

namespace wgl::testing {

struct SimReport {
  std::size_t workbenches = 0;
  std::size_t equal_after_broadcast = 0;
  std::size_t mirrors_checked = 0;
  std::size_t mirrors_equal = 0;
  std::size_t replays_checked = 0;
  std::size_t replays_identical = 0;
  std::size_t ops_applied = 0;
  std::size_t rejects = 0;
  std::size_t autosaved = 0;
  std::size_t broadcast_count = 0;
  std::string detail;

  bool converged() const {
    return workbenches > 0 && equal_after_broadcast == workbenches && mirrors_equal == mirrors_checked &&
           broadcast_count == workbenches;
  }
  bool replay_ok() const { return replays_checked == workbenches && replays_identical == replays_checked; }
};

namespace detail {

inline std::vector<std::string> script_lines(std::string_view text) {
  std::vector<std::string> out;
  const Construction c = format::parse(text).value();
  for (const auto& s : c.steps()) out.push_back(format::serialize_step(s));
  return out;
}

inline std::vector<std::string> free_points(const Construction& c) {
  std::vector<std::string> out;
  for (const auto& s : c.steps()) {
    if (std::holds_alternative<step::Free>(s.kind)) out.push_back(s.id.str());
  }
  return out;
}

}  // namespace detail

inline SimReport run_classroom_simulation(World& w, int students, std::uint64_t seed, int actions = 40) {
  SimReport report;
  classroom::SessionManager sessions(*w.repo);
  const std::string session = sessions.create_session(w.teacher.user_id).value();

  std::vector<User> users;
  for (int i = 0; i < students; ++i) {
    users.push_back(w.repo->create_user(w.teacher.user_id, "sim" + std::to_string(seed) + "_" + std::to_string(i),
                                        "Student " + std::to_string(i), Role::Student, "pw")
                        .value());
  }

  SimClient teacher(sessions, session, w.teacher);
  teacher.open();
  teacher.join();
  std::vector<std::unique_ptr<SimClient>> clients;
  for (const auto& u : users) {
    clients.push_back(std::make_unique<SimClient>(sessions, session, u));
    clients.back()->open();
    clients.back()->join();
  }
  for (const auto& u : users) teacher.watch(u.user_id);
  // Each student opens its workbench to the next one for shared editing.
  for (int i = 0; i < students; ++i) {
    const auto& peer = *clients[(i + 1) % students];
    clients[i]->send({{"t", "grant"}, {"grantee", peer.id()}, {"mode", "edit"}});
  }
  for (int i = 0; i < students; ++i) clients[(i + 1) % students]->watch(clients[i]->id());

  const auto script = detail::script_lines(kIncenter);
  std::vector<std::thread> threads;
  for (int i = 0; i < students; ++i) {
    threads.emplace_back([&, i] {
      SimClient& me = *clients[i];
      const std::string peer = clients[(i + students - 1) % students]->id();  // granted us edit
      std::mt19937_64 rng(seed * 1000 + static_cast<std::uint64_t>(i));
      std::uniform_real_distribution<double> coord(-10, 10);
      std::size_t next = 0;
      for (int k = 0; k < actions; ++k) {
        me.pump();
        const auto roll = rng() % 10;
        const auto& own = me.mirrors().at(me.id()).construction;
        if (roll < 6 && next < script.size()) {
          me.add(me.id(), script[next++]);
        } else if (roll < 8) {
          const auto pts = detail::free_points(own);
          if (!pts.empty()) me.move(me.id(), pts[rng() % pts.size()], coord(rng), coord(rng));
        } else if (roll < 9) {
          auto it = me.mirrors().find(peer);
          if (it != me.mirrors().end()) {
            const auto pts = detail::free_points(it->second.construction);
            if (!pts.empty()) me.move(peer, pts[rng() % pts.size()], coord(rng), coord(rng));
          }
        } else if (!own.empty() && next > 0 && !std::holds_alternative<step::Free>(own.steps().back().kind)) {
          const bool scripted_last = format::serialize_step(own.steps().back()) == script[next - 1];
          me.remove(me.id(), own.steps().back().id.str());
          // Queue it again so the script still completes.
          if (scripted_last) --next;
        }
      }
      me.pump();
    });
  }
  threads.emplace_back([&] {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-10, 10);
    for (int k = 0; k < actions; ++k) {
      teacher.pump();
      const auto& target = users[rng() % users.size()].user_id;
      auto it = teacher.mirrors().find(target);
      if (it == teacher.mirrors().end()) continue;
      const auto pts = detail::free_points(it->second.construction);
      if (!pts.empty()) teacher.move(target, pts[rng() % pts.size()], coord(rng), coord(rng));
    }
    teacher.pump();
  });
  for (auto& t : threads) t.join();

  auto all_members = [&] {
    std::vector<std::string> ids{w.teacher.user_id};
    for (const auto& u : users) ids.push_back(u.user_id);
    return ids;
  }();
  std::vector<bool> dirty_before;
  for (const auto& id : all_members) dirty_before.push_back(sessions.is_dirty(session, id).value());

  const Construction solution = format::parse(kCircumOrtho).value();
  teacher.send({{"t", "broadcast"}, {"construction", std::string(kCircumOrtho)}});
  const auto ack = teacher.last("broadcast");
  report.broadcast_count = ack.is_null() ? 0 : ack["count"].get<std::size_t>();
  teacher.pump();
  for (auto& c : clients) c->pump();

  const std::string expected = format::serialize(solution);
  std::ostringstream why;
  for (std::size_t i = 0; i < all_members.size(); ++i) {
    const auto& id = all_members[i];
    ++report.workbenches;
    const auto snap = sessions.snapshot(session, w.teacher.user_id, id).value();
    if (snap.construction == solution && format::serialize(snap.construction) == expected) {
      ++report.equal_after_broadcast;
    } else {
      why << "workbench " << id << " differs after broadcast\n";
    }
    const auto log = sessions.op_log(session, id).value();
    report.ops_applied += log.size();
    ++report.replays_checked;
    if (format::serialize(classroom::replay(log)) == format::serialize(snap.construction)) {
      ++report.replays_identical;
    } else {
      why << "replay of " << id << " diverges\n";
    }
    if (i > 0 && dirty_before[i]) {
      auto book = w.repo->scrapbook(id, id).value();
      if (!book.empty()) ++report.autosaved;
    }
  }
  auto check_mirror = [&](const SimClient& c, const std::string& owner) {
    ++report.mirrors_checked;
    auto it = c.mirrors().find(owner);
    if (it != c.mirrors().end() && it->second.construction == solution) {
      ++report.mirrors_equal;
    } else {
      why << "client " << c.id() << " mirror of " << owner << " stale\n";
    }
  };
  check_mirror(teacher, w.teacher.user_id);
  for (const auto& u : users) check_mirror(teacher, u.user_id);
  for (const auto& c : clients) {
    check_mirror(*c, c->id());
    report.rejects += c->rejects();
  }
  report.rejects += teacher.rejects();
  report.detail = why.str();
  return report;
}

}  // namespace wgl::testing
