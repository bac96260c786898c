use brickgen_core::extract::tokenize_all;
use brickgen_core::fixtures;
use brickgen_core::matcher::{match_corpus, MatchConfig};

fn main() {
    let list = fixtures::corpus();
    let tax = fixtures::taxonomy();
    let pts = tokenize_all(&list.points, &fixtures::dictionary(), &fixtures::abbreviations(), &fixtures::registry());
    let (res, stats) = match_corpus(&pts, &tax, MatchConfig::default());
    for ((p, r), tp) in list.points.iter().zip(&res).zip(&pts) {
        let exp = p.extra.get("expected").cloned().unwrap_or_default();
        let got = r.best.clone().unwrap_or_default();
        if exp != got {
            println!("{:<50} exp={:<40} got={} {:?} {:?}", p.name, exp, got, r.score, tp.tokens);
        }
    }
    println!("{stats:?}");
}
