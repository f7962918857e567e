class Source {
public:
  int keep(){
    return 7;
  }
  int helper(int n){
    return n + 1;
  }
};
class Target {
public:
  int base;
};
