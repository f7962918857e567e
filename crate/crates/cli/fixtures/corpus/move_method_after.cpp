class Source {
public:
  int keep(){
    return 7;
  }
};
class Target {
public:
  int base;
  int helper(int n){
    return n + 1;
  }
};
