"""CSV reports and static charts."""
