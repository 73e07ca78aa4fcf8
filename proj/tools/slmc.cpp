// command line interface, takes shape together with the checker module
int main() { return 64; }
