//! Repository address canonicalization.
//!
//! Registry metadata spells the same repository many ways. Every accepted
//! form reduces to `host/owner/name`:
//!
//! | input                                      | canonical                    |
//! |--------------------------------------------|------------------------------|
//! | `owner/name`                               | `github.com/owner/name`      |
//! | `github:owner/name`                        | `github.com/owner/name`      |
//! | `gitlab:owner/name`                        | `gitlab.com/owner/name`      |
//! | `bitbucket:owner/name`                     | `bitbucket.org/owner/name`   |
//! | `git+https://github.com/owner/name.git`    | `github.com/owner/name`      |
//! | `git://github.com/owner/name.git`          | `github.com/owner/name`      |
//! | `git+ssh://git@github.com/owner/name.git`  | `github.com/owner/name`      |
//! | `git@github.com:owner/name.git`            | `github.com/owner/name`      |
//! | `https://github.com/owner/name/tree/main`  | `github.com/owner/name`      |
//!
//! Hosts are lowercased, a trailing `.git`, fragments and query strings are
//! dropped. Gists and anything without an owner and a name yield `None`.

pub fn normalize_repository(raw: &str) -> Option<String> {
    let mut text = raw.trim();
    if text.is_empty() {
        return None;
    }
    if let Some(idx) = text.find(['#', '?']) {
        text = &text[..idx];
    }

    for (prefix, host) in [
        ("github:", "github.com"),
        ("gitlab:", "gitlab.com"),
        ("bitbucket:", "bitbucket.org"),
    ] {
        if let Some(rest) = text.strip_prefix(prefix) {
            return owner_and_name(host, rest);
        }
    }
    if text.starts_with("gist:") {
        return None;
    }

    let text = text.strip_prefix("git+").unwrap_or(text);
    if let Some((_, rest)) = text.split_once("://") {
        // Drop credentials such as `git@`.
        let rest = match rest.split_once('@') {
            Some((user, after)) if !user.contains('/') => after,
            _ => rest,
        };
        let (host, path) = rest.split_once('/')?;
        // `ssh://git@host:owner/name` style ports or scp separators.
        let host = host.split(':').next().unwrap_or(host);
        return owner_and_name(host, path);
    }

    // scp-like `git@host:owner/name.git`
    if let Some((userhost, path)) = text.split_once(':') {
        let host = userhost.rsplit('@').next().unwrap_or(userhost);
        if host.contains('.') {
            return owner_and_name(host, path);
        }
        return None;
    }

    // Bare `owner/name` shorthand.
    if looks_like_shorthand(text) {
        return owner_and_name("github.com", text);
    }
    None
}

fn looks_like_shorthand(text: &str) -> bool {
    let mut parts = text.split('/');
    matches!((parts.next(), parts.next(), parts.next()), (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() && !a.contains('.'))
}

fn owner_and_name(host: &str, path: &str) -> Option<String> {
    let host = host.trim().to_ascii_lowercase();
    if host.is_empty() {
        return None;
    }
    let mut segments = path.split('/').filter(|s| !s.is_empty());
    let owner = segments.next()?;
    let name = segments.next()?;
    let name = name.strip_suffix(".git").unwrap_or(name);
    if name.is_empty() {
        return None;
    }
    Some(format!("{host}/{owner}/{name}"))
}
