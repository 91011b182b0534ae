mod common;

use cyclescope::aux::parse_overrides;
use cyclescope::session::Session;

use common::{command_at, session};

fn pre(s: &Session, sig: &str, line: u32) -> cyclescope::aux::AuxFacts {
    s.facts.point(sig, command_at(&s.tp, sig, line).pos).pre.clone()
}

const WALK: &str = "class N { N next; N other;
  int m(N x) { N y, z;
    y := x.next;
    y.next := null;
    z := new N;
    z.next := x;
    return 0
  }
}";

#[test]
fn field_read_shares_with_source() {
    let s = Session::new(WALK).unwrap();
    let at4 = pre(&s, "N.m", 4);
    assert!(at4.shares("x", "y"));
    // a fresh object shares with nothing until it is linked
    let at6 = pre(&s, "N.m", 6);
    assert!(!at6.shares("z", "x") && !at6.shares("z", "y") && !at6.aliases("z", "x"));
    let at7 = pre(&s, "N.m", 7);
    assert!(at7.shares("z", "x") && at7.shares("z", "y"));
}

#[test]
fn incompleteness_fragment_facts() {
    let s = session("incompleteness", false);
    let at10 = pre(&s, "C.run", 10);
    assert!(at10.shares("y", "z"));
    assert!(!at10.aliases("y", "z"));
}

#[test]
fn purity_of_worked_examples() {
    let s = session("more_examples", false);
    for m in ["Node.g", "Node.h", "Node.k"] {
        assert!(s.facts.nonpure(m).contains(&0), "{m} updates this");
        assert!(!s.facts.nonpure(m).contains(&1), "{m} leaves y alone");
    }
    // f updates a and c and, through g, b; this is only linked to
    assert_eq!(s.facts.nonpure("Node.f").iter().copied().collect::<Vec<_>>(), [1, 2, 3]);
    let ol = session("ordered_list", false);
    assert!(ol.facts.nonpure("OrderedList.insert").contains(&0));
    assert!(session("mirror", false).facts.nonpure("Util.mirror").contains(&1));
    assert!(session("connect", false).facts.nonpure("Node.connect").contains(&0));
}

#[test]
fn summaries_relate_result_to_arguments() {
    let s = session("more_examples", false);
    let g = s.facts.summary("Node.g").unwrap();
    assert!(g.aliases("out", "this"));
    assert!(g.shares("this", "y'"));
}

#[test]
fn overrides_replace_listed_lines_only() {
    let mut s = session("more_examples", false);
    let before6 = pre(&s, "Node.f", 6);
    s.apply_facts_text("t.facts", "at f:5 share a c").unwrap();
    let at5 = pre(&s, "Node.f", 5);
    assert!(at5.shares("a", "c"));
    assert!(!at5.shares("a", "b"));
    assert!(s.facts.is_overridden("Node.f", 5) && !s.facts.is_overridden("Node.f", 6));
    assert_eq!(pre(&s, "Node.f", 6), before6);
}

#[test]
fn none_clears_a_method() {
    let mut s = session("more_examples", false);
    s.apply_facts_text("t.facts", "at f:* none\nmethod f pure").unwrap();
    for line in 5..=7 {
        let p = pre(&s, "Node.f", line);
        assert!(!p.shares("a", "b") && !p.shares("b", "c") && !p.aliases("a", "b"), "line {line}");
    }
    assert!(s.facts.nonpure("Node.f").is_empty());
    // a shallow copy still mirrors its formal
    assert!(pre(&s, "Node.f", 5).aliases("a", "a'"));
}

#[test]
fn override_parse_errors() {
    let bad = [
        ("at f share a b", "expected `<method>:<line>`"),
        ("at f:x share a b", "bad line number `x`"),
        ("method f nonpure one", "bad argument index `one`"),
        ("frobnicate", "cannot parse `frobnicate`"),
    ];
    for (text, want) in bad {
        let e = parse_overrides("o.facts", text).unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.to_string().starts_with("o.facts:1: ") && e.message.contains(want), "{e}");
    }
    assert!(parse_overrides("o.facts", "# only a comment\n\n").unwrap().is_empty());
}

#[test]
fn override_resolution_errors() {
    let cases = [
        ("at nope:5 share a b", "unknown method `nope`"),
        ("at f:5 share a q", "unknown reference variable `q`"),
        ("at f:99 share a b", "no program point at line 99"),
        ("method g nonpure 7", "has no argument 7"),
    ];
    for (text, want) in cases {
        let mut s = session("more_examples", false);
        let e = s.apply_facts_text("o.facts", text).unwrap_err();
        assert!(e.message.contains(want), "{text}: {e}");
    }
    let mut s = Session::new("class A { int m() { return 0 } } class B { int m() { return 0 } }").unwrap();
    let e = s.apply_facts_text("o.facts", "method m pure").unwrap_err();
    assert!(e.message.contains("ambiguous"), "{e}");
    assert!(s.apply_facts_text("o.facts", "method B.m pure").is_ok());
}
