//! Check identifiers, lines of code and comments against the ruleset and
//! show which rule each rejection is reported under.
//!
//! ```bash
//! cargo run -p commentlab --example validate_rules
//! ```

use commentlab::grammar::{validate_comment, validate_identifier, validate_line, validate_sample};

fn main() {
    println!("identifiers");
    for ident in ["total", "avg1", "difference_1", "$myvar", "x!y", "1st", "while", "naïve"] {
        match validate_identifier(ident) {
            Ok(_) => println!("  {ident:<14} ok"),
            Err(v) => println!("  {ident:<14} rule {:>2}: {v}", v.rule()),
        }
    }

    println!("lines of code");
    for line in ["int marks = 10;", "float rate;", "int marks = 101;", "int marks = 1.5;", "string s;", "int x"] {
        match validate_line(line) {
            Ok(l) => println!("  {line:<18} ok (head `{}`, value {:?})", l.head(), l.value()),
            Err(v) => println!("  {line:<18} rule {:>2}: {v}", v.rule()),
        }
    }

    println!("comments");
    for comment in ["// counter", "/* loop bound */", "/* open", "# hash", "//\n// two lines", "/**/"] {
        let shown = comment.replace('\n', "\\n");
        match validate_comment(comment) {
            Ok(c) => println!("  {shown:<18} ok ({:?})", c.style()),
            Err(v) => println!("  {shown:<18} rule {:>2}: {v}", v.rule()),
        }
    }

    // A whole sample reports the first violation of each component.
    let err = validate_sample("int $myvar = 3;", "no delimiter", "Maybe").unwrap_err();
    println!("sample\n  {err}");
}
