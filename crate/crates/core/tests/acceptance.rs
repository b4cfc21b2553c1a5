use res112::selfcheck::{run_criterion, CRITERIA};

fn main() {
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let r = run_criterion(id);
        println!("{}", r.line());
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
