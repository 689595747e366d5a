//! Argument value parsers: `start:stop:step` ranges and angle expressions.

/// Inclusive `start:stop:step` grid.
pub fn range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:step, got {text:?}"));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number {s:?} in range: {e}"))
    };
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(format!("range {text:?} needs start <= stop and step > 0"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(format!("range {text:?} has {count} points"));
    }
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

/// Angles: a number, `pi`, `sqrt(x)` / `sqrtN`, `acos(x)`, `cos(x)`, and `/`, `*`.
pub fn angle(text: &str) -> Result<f64, String> {
    let mut p = Parser {
        s: text.as_bytes(),
        i: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(format!("trailing input in {text:?}"));
    }
    if !v.is_finite() {
        return Err(format!("{text:?} is not a finite angle"));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.atom()?;
        loop {
            if self.eat(b'/') {
                v /= self.atom()?;
            } else if self.eat(b'*') {
                v *= self.atom()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_alphabetic() {
            self.i += 1;
        }
        let word = std::str::from_utf8(&self.s[start..self.i]).unwrap_or("");
        match word {
            "" => self.number(),
            "pi" => Ok(std::f64::consts::PI),
            "acos" | "cos" | "sqrt" => {
                let arg = if self.eat(b'(') {
                    let v = self.expr()?;
                    if !self.eat(b')') {
                        return Err("missing ')'".into());
                    }
                    v
                } else {
                    self.number()?
                };
                Ok(match word {
                    "acos" => arg.acos(),
                    "cos" => arg.cos(),
                    _ => arg.sqrt(),
                })
            }
            other => Err(format!("unknown name {other:?}")),
        }
    }

    fn number(&mut self) -> Result<f64, String> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len()
            && (self.s[self.i].is_ascii_digit()
                || matches!(self.s[self.i], b'.' | b'-' | b'+' | b'e' | b'E'))
        {
            self.i += 1;
        }
        let t = std::str::from_utf8(&self.s[start..self.i]).unwrap_or("");
        t.parse::<f64>().map_err(|_| format!("expected a number at {t:?}"))
    }
}
