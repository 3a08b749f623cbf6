"""Opinion mining of Bangla survey text."""
